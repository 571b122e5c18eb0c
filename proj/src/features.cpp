#include "gazecap/features.hpp"

#include "gazecap/binary_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace gazecap {

namespace {

constexpr int kBins = 8;
constexpr int kEdgeThreshold = 32;  // on integer intensity (0..765 scale / 3)

int intensity(const RgbImage& img, int y, int x) { return (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3; }

bool is_edge(const RgbImage& img, int y, int x) {
    const int c = intensity(img, y, x);
    const int right = intensity(img, y, std::min(img.width - 1, x + 1));
    const int down = intensity(img, std::min(img.height - 1, y + 1), x);
    return std::abs(right - c) + std::abs(down - c) > kEdgeThreshold;
}

}  // namespace

FeatureGrid toy_extract(const RgbImage& img, int grid_h, int grid_w) {
    if (grid_h <= 0 || grid_w <= 0) throw InputError("toy_extract: grid dims must be positive");
    if (img.height < grid_h || img.width < grid_w) throw InputError("toy_extract: image smaller than grid");
    FeatureGrid fg;
    fg.grid_h = grid_h;
    fg.grid_w = grid_w;
    fg.a = Matrix::Zero(static_cast<Index>(grid_h) * grid_w, kToyFeatureDim);
    for (int cy = 0; cy < grid_h; ++cy) {
        const int y0 = cy * img.height / grid_h;
        const int y1 = (cy + 1) * img.height / grid_h;
        for (int cx = 0; cx < grid_w; ++cx) {
            const int x0 = cx * img.width / grid_w;
            const int x1 = (cx + 1) * img.width / grid_w;
            auto row = fg.a.row(static_cast<Index>(cy) * grid_w + cx);
            Real edges = 0.0;
            Real inten = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    for (int c = 0; c < 3; ++c) row(c * kBins + img.at(y, x, c) * kBins / 256) += 1.0;
                    edges += is_edge(img, y, x) ? 1.0 : 0.0;
                    inten += (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / (3.0 * 255.0);
                }
            }
            const Real n = static_cast<Real>((y1 - y0) * (x1 - x0));
            row.head(3 * kBins) /= n;
            row(3 * kBins) = edges / n;
            row(3 * kBins + 1) = inten / n;
            row /= row.norm();  // histogram part alone has norm > 0
        }
    }
    return fg;
}

FeatureGrid quantize_to_storage(const FeatureGrid& grid) {
    FeatureGrid q = grid;
    q.a = grid.a.cast<float>().cast<Real>();
    return q;
}

void write_feature_file(const std::filesystem::path& path, const std::vector<FeatureRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const FeatureGrid* first = records.empty() ? nullptr : &records.front().grid;
    out.write("GFC1", 4);
    binio::put_u32(out, 1);
    binio::put_u32(out, static_cast<std::uint32_t>(records.size()));
    binio::put_u32(out, first ? static_cast<std::uint32_t>(first->grid_h) : 0);
    binio::put_u32(out, first ? static_cast<std::uint32_t>(first->grid_w) : 0);
    binio::put_u32(out, first ? static_cast<std::uint32_t>(first->dim()) : 0);
    for (const auto& r : records) {
        if (r.grid.grid_h != first->grid_h || r.grid.grid_w != first->grid_w || r.grid.dim() != first->dim()) {
            throw InputError("feature file: record " + r.image_id + " has inconsistent geometry");
        }
        r.grid.validate();
        binio::put_string(out, r.image_id);
        for (Index i = 0; i < r.grid.a.size(); ++i) binio::put_f32(out, static_cast<float>(r.grid.a.data()[i]));
    }
}

std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    binio::expect_magic(in, "GFC1", path.string());
    const auto version = binio::get_u32(in, "version");
    if (version != 1) throw InputError(path.string() + ": unsupported feature file version " + std::to_string(version));
    const auto count = binio::get_u32(in, "count");
    const auto gh = static_cast<int>(binio::get_u32(in, "grid_h"));
    const auto gw = static_cast<int>(binio::get_u32(in, "grid_w"));
    const auto d = static_cast<Index>(binio::get_u32(in, "D"));
    std::vector<FeatureRecord> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        FeatureRecord r;
        r.image_id = binio::get_string(in, "image id");
        r.grid.grid_h = gh;
        r.grid.grid_w = gw;
        r.grid.a.resize(static_cast<Index>(gh) * gw, d);
        for (Index i = 0; i < r.grid.a.size(); ++i) r.grid.a.data()[i] = binio::get_f32(in, "feature values");
        r.grid.validate();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace gazecap
