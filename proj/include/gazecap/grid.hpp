#ifndef GAZECAP_GRID_HPP
#define GAZECAP_GRID_HPP

#include "gazecap/types.hpp"

#include <string>

namespace gazecap {

/// L x D annotation vectors of one image; row i is region i in row-major
/// grid order.
struct FeatureGrid {
    int grid_h = 0;
    int grid_w = 0;
    Matrix a;

    Index regions() const { return a.rows(); }
    Index dim() const { return a.cols(); }
    void validate() const;
};

/// Per-cell fixation mass in [0,1], same cell order as FeatureGrid.
struct GazeHistogram {
    int grid_h = 0;
    int grid_w = 0;
    ColVector g;

    Index regions() const { return g.size(); }
    bool any() const { return g.size() > 0 && g.maxCoeff() > 0.0; }
    /// Throws InputError unless every value is finite and in [0,1].
    void validate() const;
};

}  // namespace gazecap

#endif  // GAZECAP_GRID_HPP
