#ifndef GAZECAP_GAZE_HPP
#define GAZECAP_GAZE_HPP

#include "gazecap/grid.hpp"
#include "gazecap/image.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gazecap {

struct Fixation {
    Real x = 0.0;  // normalized [0,1], left to right
    Real y = 0.0;  // normalized [0,1], top to bottom
    std::optional<Real> duration_ms;
};

struct FixationRecord {
    std::string image_id;
    std::vector<Fixation> fixations;

    /// Throws InputError on coordinates outside [0,1] or non-positive durations.
    void validate() const;
};

/// Geometry that maps source-image coordinates onto the feature grid:
/// scale the shortest side to `resize_short`, then take a centered
/// `crop` x `crop` window. An identity crop (default) uses the full image.
struct CropSpec {
    int image_width = 0;
    int image_height = 0;
    int resize_short = 0;
    int crop = 0;

    bool identity() const { return resize_short <= 0 || crop <= 0 || image_width <= 0 || image_height <= 0; }
    /// Maps normalized image coordinates to normalized crop coordinates;
    /// nullopt when the point falls outside the crop.
    std::optional<std::pair<Real, Real>> map(Real x, Real y) const;
};

struct HistogramOptions {
    int grid_h = 14;
    int grid_w = 14;
    Real smoothing_sigma = 0.0;  // in cell units; 0 disables
};

/// Bins fixations into the grid (duration-weighted when every fixation has a
/// duration, count-weighted otherwise), optionally smooths, then divides by
/// the maximum cell so the peak is 1. No surviving fixation gives all zeros.
GazeHistogram fixation_histogram(const FixationRecord& rec, const CropSpec& crop, const HistogramOptions& options);

/// Max-normalized resample of a dense map (e.g. saliency) to a grid, for the
/// same gating pathway as fixations.
GazeHistogram histogram_from_map(const DenseMap& map, int grid_h, int grid_w);

/// Radial prior: max distance minus distance to the image center, so the
/// center ranks highest.
DenseMap center_map(int height, int width);

/// Exposes the ceil(r * h * w) highest-valued pixels; ties go to the lower
/// row-major index.
BooleanMap threshold_to_ratio(const DenseMap& map, Real ratio);

/// Dense fixation density at pixel resolution (Gaussian-smoothed counts or
/// durations), for the masking analysis.
DenseMap fixation_density(const FixationRecord& rec, int height, int width, Real sigma_pixels);

/// Export helper: the histogram reshaped to grid_h x grid_w.
DenseMap histogram_grid(const GazeHistogram& g);

}  // namespace gazecap

#endif  // GAZECAP_GAZE_HPP
