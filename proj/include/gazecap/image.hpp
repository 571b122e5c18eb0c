#ifndef GAZECAP_IMAGE_HPP
#define GAZECAP_IMAGE_HPP

#include "gazecap/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gazecap {

/// 8-bit interleaved RGB, row-major.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(int h, int w, std::uint8_t fill = 0);

    std::uint8_t& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    void set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    bool operator==(const RgbImage&) const = default;
};

/// Nonnegative scalar field over pixels (or grid cells), h x w.
using DenseMap = Matrix;
/// Binary field; entries are 0 or 1.
using BooleanMap = MatrixT<std::uint8_t>;

RgbImage flip_horizontal(const RgbImage& img);

/// Binary PPM (P6, maxval 255).
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

/// Binary PGM. Values are clamped to [0,1] and scaled to the full range;
/// each line of `comment` becomes a '#' header line.
void write_pgm8(const std::filesystem::path& path, const DenseMap& map, const std::string& comment = "");
void write_pgm16(const std::filesystem::path& path, const DenseMap& map, const std::string& comment = "");
/// Reads P5 with maxval up to 65535, scaled to [0,1].
DenseMap read_pgm(const std::filesystem::path& path);

/// Comma-separated rows, full round-trip precision, after optional '# ' lines.
void write_csv_grid(const std::filesystem::path& path, const DenseMap& map, const std::string& header_comment = "");
DenseMap read_csv_grid(const std::filesystem::path& path);

/// Separable Gaussian blur with clamped borders; symmetric pairs are summed
/// first so the result is exactly flip-equivariant. sigma <= 0 returns a copy.
DenseMap gaussian_blur(const DenseMap& map, Real sigma);

/// Nearest-neighbour resample.
DenseMap resize_nearest(const DenseMap& map, int height, int width);

/// Area-average resample to a coarser grid (cell = mean of covered pixels,
/// with fractional coverage).
DenseMap resize_area(const DenseMap& map, int height, int width);

}  // namespace gazecap

#endif  // GAZECAP_IMAGE_HPP
