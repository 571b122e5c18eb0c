#ifndef GAZECAP_FEATURES_HPP
#define GAZECAP_FEATURES_HPP

#include "gazecap/grid.hpp"
#include "gazecap/image.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gazecap {

/// Per-cell descriptor width of toy_extract: 8 bins x 3 channels, edge
/// density, mean intensity.
inline constexpr int kToyFeatureDim = 26;

/// Cheap stand-in for CNN activations: per grid cell, an RGB histogram
/// (8 bins per channel, fraction of cell pixels), the fraction of edge pixels
/// and the mean intensity / 255, scaled to unit L2 norm.
FeatureGrid toy_extract(const RgbImage& img, int grid_h, int grid_w);

struct FeatureRecord {
    std::string image_id;
    FeatureGrid grid;
};

/// "GFC1" feature file: magic, u32 version, u32 count, u32 grid_h,
/// u32 grid_w, u32 D, then per record a u32-length-prefixed id and L*D
/// little-endian float32 values (row-major, region by region).
void write_feature_file(const std::filesystem::path& path, const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path);

/// Rounds through float32, i.e. what a write/read round trip yields.
FeatureGrid quantize_to_storage(const FeatureGrid& grid);

}  // namespace gazecap

#endif  // GAZECAP_FEATURES_HPP
