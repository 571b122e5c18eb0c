#include "gazecap/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace gazecap {

void FixationRecord::validate() const {
    for (const auto& f : fixations) {
        if (!(f.x >= 0.0 && f.x <= 1.0 && f.y >= 0.0 && f.y <= 1.0)) {
            throw InputError("fixation outside [0,1] in record " + image_id);
        }
        if (f.duration_ms && !(*f.duration_ms > 0.0)) {
            throw InputError("non-positive fixation duration in record " + image_id);
        }
    }
}

std::optional<std::pair<Real, Real>> CropSpec::map(Real x, Real y) const {
    if (identity()) return std::make_pair(x, y);
    const Real scale = static_cast<Real>(resize_short) / std::min(image_width, image_height);
    const Real w = image_width * scale;
    const Real h = image_height * scale;
    const Real u = (x * w - (w - crop) / 2.0) / crop;
    const Real v = (y * h - (h - crop) / 2.0) / crop;
    if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
    return std::make_pair(u, v);
}

namespace {

int cell_index(Real u, int n) { return std::min(n - 1, static_cast<int>(std::floor(u * n))); }

// Accumulation order fixed independent of input order, so results are
// bit-identical under permutation.
std::vector<Fixation> canonical_order(std::vector<Fixation> fx) {
    std::sort(fx.begin(), fx.end(), [](const Fixation& a, const Fixation& b) {
        return std::tuple(a.y, a.x, a.duration_ms.value_or(0.0)) < std::tuple(b.y, b.x, b.duration_ms.value_or(0.0));
    });
    return fx;
}

void max_normalize(ColVector& g) {
    const Real m = g.size() ? g.maxCoeff() : 0.0;
    if (m > 0.0) g /= m;
}

}  // namespace

GazeHistogram fixation_histogram(const FixationRecord& rec, const CropSpec& crop, const HistogramOptions& options) {
    if (options.grid_h <= 0 || options.grid_w <= 0) throw InputError("fixation_histogram: grid dims must be positive");
    rec.validate();
    const bool weighted = !rec.fixations.empty() &&
                          std::all_of(rec.fixations.begin(), rec.fixations.end(),
                                      [](const Fixation& f) { return f.duration_ms.has_value(); });
    DenseMap cells = DenseMap::Zero(options.grid_h, options.grid_w);
    for (const auto& f : canonical_order(rec.fixations)) {
        const auto uv = crop.map(f.x, f.y);
        if (!uv) continue;
        const int cx = cell_index(uv->first, options.grid_w);
        const int cy = cell_index(uv->second, options.grid_h);
        cells(cy, cx) += weighted ? *f.duration_ms : 1.0;
    }
    cells = gaussian_blur(cells, options.smoothing_sigma);
    GazeHistogram out;
    out.grid_h = options.grid_h;
    out.grid_w = options.grid_w;
    out.g = Eigen::Map<const ColVector>(cells.data(), cells.size());
    max_normalize(out.g);
    return out;
}

GazeHistogram histogram_from_map(const DenseMap& map, int grid_h, int grid_w) {
    DenseMap cells = resize_area(map, grid_h, grid_w);
    GazeHistogram out;
    out.grid_h = grid_h;
    out.grid_w = grid_w;
    out.g = Eigen::Map<const ColVector>(cells.data(), cells.size());
    out.g = out.g.cwiseMax(0.0);
    max_normalize(out.g);
    return out;
}

DenseMap center_map(int height, int width) {
    if (height <= 0 || width <= 0) throw InputError("center_map: dims must be positive");
    const Real cy = (height - 1) / 2.0;
    const Real cx = (width - 1) / 2.0;
    DenseMap d(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) d(y, x) = std::sqrt((y - cy) * (y - cy) + (x - cx) * (x - cx));
    }
    return (d.maxCoeff() - d.array()).matrix();
}

BooleanMap threshold_to_ratio(const DenseMap& map, Real ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw InputError("threshold_to_ratio: ratio must be in [0,1]");
    const auto n = static_cast<std::size_t>(map.size());
    // Guard against r * n landing a hair above an integer (0.07 * 100).
    const auto k = std::min(n, static_cast<std::size_t>(std::ceil(ratio * static_cast<Real>(n) - 1e-9)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Real* v = map.data();
    std::stable_sort(order.begin(), order.end(), [v](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    BooleanMap mask = BooleanMap::Zero(map.rows(), map.cols());
    for (std::size_t i = 0; i < k; ++i) mask.data()[order[i]] = 1;
    return mask;
}

DenseMap fixation_density(const FixationRecord& rec, int height, int width, Real sigma_pixels) {
    rec.validate();
    const bool weighted = !rec.fixations.empty() &&
                          std::all_of(rec.fixations.begin(), rec.fixations.end(),
                                      [](const Fixation& f) { return f.duration_ms.has_value(); });
    DenseMap m = DenseMap::Zero(height, width);
    for (const auto& f : canonical_order(rec.fixations)) {
        m(cell_index(f.y, height), cell_index(f.x, width)) += weighted ? *f.duration_ms : 1.0;
    }
    return gaussian_blur(m, sigma_pixels);
}

DenseMap histogram_grid(const GazeHistogram& g) {
    return Eigen::Map<const DenseMap>(g.g.data(), g.grid_h, g.grid_w);
}

}  // namespace gazecap
