#include "gazecap/saliency.hpp"

#include "gazecap/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gazecap {

std::array<DenseMap, 3> opponent_channels(const RgbImage& img) {
    std::array<DenseMap, 3> ch;
    for (auto& c : ch) c.resize(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Real r = img.at(y, x, 0);
            const Real g = img.at(y, x, 1);
            const Real b = img.at(y, x, 2);
            ch[0](y, x) = (r + g + b) / 3.0;
            ch[1](y, x) = (r - g + 255.0) / 2.0;
            ch[2](y, x) = (b - (r + g) / 2.0 + 255.0) / 2.0;
        }
    }
    return ch;
}

std::vector<BooleanMap> boolean_maps(const RgbImage& img, int step) {
    if (step < 1) throw InputError("boolean_maps: step must be >= 1");
    std::vector<BooleanMap> maps;
    for (const DenseMap& ch : opponent_channels(img)) {
        for (int theta = 0; theta <= 255; theta += step) {
            BooleanMap b = (ch.array() > static_cast<Real>(theta)).cast<std::uint8_t>();
            BooleanMap inv = (1 - b.array()).matrix();
            maps.push_back(std::move(b));
            maps.push_back(std::move(inv));
        }
    }
    return maps;
}

DenseMap attention_from_map(const BooleanMap& map) {
    const auto h = static_cast<int>(map.rows());
    const auto w = static_cast<int>(map.cols());
    // Flood the 1-valued regions that touch the border.
    BooleanMap reached = BooleanMap::Zero(h, w);
    std::vector<std::pair<int, int>> stack;
    auto seed = [&](int y, int x) {
        if (map(y, x) == 1 && reached(y, x) == 0) {
            reached(y, x) = 1;
            stack.emplace_back(y, x);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(0, x);
        seed(h - 1, x);
    }
    for (int y = 0; y < h; ++y) {
        seed(y, 0);
        seed(y, w - 1);
    }
    while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        if (y > 0) seed(y - 1, x);
        if (y + 1 < h) seed(y + 1, x);
        if (x > 0) seed(y, x - 1);
        if (x + 1 < w) seed(y, x + 1);
    }
    DenseMap att(h, w);
    Index count = 0;
    for (Index i = 0; i < att.size(); ++i) {
        const bool on = map.data()[i] == 1 && reached.data()[i] == 0;
        att.data()[i] = on ? 1.0 : 0.0;
        count += on ? 1 : 0;
    }
    if (count > 0) att /= std::sqrt(static_cast<Real>(count));
    return att;
}

DenseMap bms_saliency(const RgbImage& img, const BmsOptions& options) {
    const auto maps = boolean_maps(img, options.step);
    std::vector<DenseMap> att(maps.size());
    parallel_for(maps.size(), [&](std::size_t i) { att[i] = attention_from_map(maps[i]); });
    DenseMap mean = DenseMap::Zero(img.height, img.width);
    for (const auto& a : att) mean += a;  // map order, independent of scheduling
    mean /= static_cast<Real>(maps.size());
    const Real sigma = options.blur_sigma < 0.0 ? 0.03 * std::max(img.height, img.width) : options.blur_sigma;
    DenseMap s = gaussian_blur(mean, sigma);
    const Real m = s.maxCoeff();
    if (m > 0.0) s /= m;
    return s;
}

}  // namespace gazecap
