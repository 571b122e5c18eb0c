#ifndef GAZECAP_SALIENCY_HPP
#define GAZECAP_SALIENCY_HPP

#include "gazecap/image.hpp"

#include <array>
#include <vector>

namespace gazecap {

/// Opponent color channels scaled to [0,255]: intensity (R+G+B)/3,
/// (R-G+255)/2 and (B-(R+G)/2+255)/2.
std::array<DenseMap, 3> opponent_channels(const RgbImage& img);

/// For each channel and threshold theta in {0, step, 2 step, ...} <= 255:
/// the map (channel > theta) followed by its complement.
std::vector<BooleanMap> boolean_maps(const RgbImage& img, int step);

/// Surroundedness: 1 on 1-valued pixels whose 4-connected 1-region does not
/// touch the image border, 0 elsewhere; L2-normalized when nonzero.
DenseMap attention_from_map(const BooleanMap& map);

struct BmsOptions {
    int step = 8;
    Real blur_sigma = -1.0;  // negative: 0.03 * max(h, w)
};

/// Mean attention over all boolean maps, blurred, rescaled so the max is 1
/// (all zeros stays all zeros).
DenseMap bms_saliency(const RgbImage& img, const BmsOptions& options = {});

}  // namespace gazecap

#endif  // GAZECAP_SALIENCY_HPP
