#include "gazecap/analysis.hpp"

#include "gazecap/gaze.hpp"
#include "gazecap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazecap {

bool Region::intersects(const Region& o) const {
    return y0 < o.y0 + o.height && o.y0 < y0 + height && x0 < o.x0 + o.width && o.x0 < x0 + width;
}

RegionColorClassifier::RegionColorClassifier(Region region, std::vector<std::array<std::uint8_t, 3>> palette)
    : region_(region), palette_(std::move(palette)) {}

RowVector RegionColorClassifier::scores(const RgbImage& img) const {
    RowVector s = RowVector::Zero(categories());
    int n = 0;
    for (int y = region_.y0; y < region_.y0 + region_.height; ++y) {
        for (int x = region_.x0; x < region_.x0 + region_.width; ++x) {
            ++n;
            for (std::size_t c = 0; c < palette_.size(); ++c) {
                if (img.at(y, x, 0) == palette_[c][0] && img.at(y, x, 1) == palette_[c][1] &&
                    img.at(y, x, 2) == palette_[c][2]) {
                    s(static_cast<Index>(c)) += 1.0;
                }
            }
        }
    }
    return n > 0 ? RowVector(s / n) : s;
}

RowVector RegionBrightnessClassifier::scores(const RgbImage& img) const {
    Real sum = 0.0;
    int n = 0;
    for (int y = region_.y0; y < region_.y0 + region_.height; ++y) {
        for (int x = region_.x0; x < region_.x0 + region_.width; ++x) {
            sum += (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0;
            ++n;
        }
    }
    RowVector s(1);
    s(0) = n > 0 ? sum / n : 0.0;
    return s;
}

LabelSubset parse_label_subset(const std::string& s) {
    if (s == "all" || s == "labels") return LabelSubset::all;
    if (s == "mentioned") return LabelSubset::mentioned;
    if (s == "ignored") return LabelSubset::ignored;
    throw InputError("unknown label subset '" + s + "'");
}

namespace {

const std::vector<int>& select_labels(const ImageLabels& l, LabelSubset subset) {
    switch (subset) {
        case LabelSubset::mentioned: return l.mentioned;
        case LabelSubset::ignored: return l.ignored;
        case LabelSubset::all: break;
    }
    return l.labels;
}

const ImageLabels& labels_for(const LabelSet& labels, const std::string& id) {
    auto it = labels.find(id);
    if (it == labels.end()) throw InputError("no labels for image " + id);
    return it->second;
}

}  // namespace

Color mean_color(const std::vector<NamedImage>& images) {
    std::array<double, 3> sum{0, 0, 0};
    double n = 0;
    for (const auto& im : images) {
        for (std::size_t i = 0; i < im.image.data.size(); i += 3) {
            for (std::size_t c = 0; c < 3; ++c) sum[c] += im.image.data[i + c];
            n += 1;
        }
    }
    Color out{0, 0, 0};
    if (n > 0) {
        for (std::size_t c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>(std::lround(sum[c] / n));
    }
    return out;
}

RgbImage apply_mask(const RgbImage& img, const BooleanMap& mask, const Color& fill) {
    if (mask.rows() != img.height || mask.cols() != img.width) throw InputError("apply_mask: mask size mismatch");
    RgbImage out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (mask(y, x) == 0) out.set(y, x, fill[0], fill[1], fill[2]);
        }
    }
    return out;
}

bool topk_hit(const RowVector& scores, const std::vector<int>& labels) {
    std::vector<int> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) > scores(b); });
    const std::size_t k = std::min(labels.size(), order.size());
    for (std::size_t i = 0; i < k; ++i) {
        if (std::find(labels.begin(), labels.end(), order[i]) != labels.end()) return true;
    }
    return false;
}

std::vector<CurvePoint> masked_accuracy_curve(const std::vector<NamedImage>& images,
                                              const std::map<std::string, DenseMap>& maps, const LabelSet& labels,
                                              const Classifier& clf, const std::vector<Real>& ratios,
                                              const Color& fill, LabelSubset subset) {
    for (Real r : ratios) {
        if (!(r >= 0.0 && r <= 1.0)) throw InputError("masked_accuracy_curve: ratio outside [0,1]");
    }
    for (const auto& im : images) {
        labels_for(labels, im.id);
        auto it = maps.find(im.id);
        if (it == maps.end()) throw InputError("no map for image " + im.id);
        if (it->second.rows() != im.image.height || it->second.cols() != im.image.width) {
            throw InputError("map size does not match image " + im.id);
        }
    }
    std::vector<CurvePoint> curve;
    for (Real r : ratios) {
        std::vector<int> hit(images.size(), -1);  // -1: skipped
        parallel_for(images.size(), [&](std::size_t i) {
            const auto& im = images[i];
            const auto& lab = select_labels(labels_for(labels, im.id), subset);
            if (lab.empty()) return;
            const RgbImage masked = apply_mask(im.image, threshold_to_ratio(maps.at(im.id), r), fill);
            hit[i] = topk_hit(clf.scores(masked), lab) ? 1 : 0;
        });
        CurvePoint p;
        p.ratio = r;
        int hits = 0;
        for (int h : hit) {
            if (h < 0) continue;
            hits += h;
            ++p.n_images;
        }
        p.accuracy = p.n_images > 0 ? static_cast<Real>(hits) / p.n_images : 0.0;
        curve.push_back(p);
    }
    return curve;
}

CurvePoint unmasked_accuracy(const std::vector<NamedImage>& images, const LabelSet& labels, const Classifier& clf,
                             LabelSubset subset) {
    CurvePoint p;
    p.ratio = 1.0;
    int hits = 0;
    for (const auto& im : images) {
        const auto& lab = select_labels(labels_for(labels, im.id), subset);
        if (lab.empty()) continue;
        hits += topk_hit(clf.scores(im.image), lab) ? 1 : 0;
        ++p.n_images;
    }
    p.accuracy = p.n_images > 0 ? static_cast<Real>(hits) / p.n_images : 0.0;
    return p;
}

ImportanceMap occlusion_importance(const RgbImage& img, int label, const Classifier& clf, int window_h, int window_w,
                                   int stride, const Color& fill) {
    if (window_h < 1 || window_w < 1 || window_h > img.height || window_w > img.width) {
        throw InputError("occlusion_importance: window must fit inside the image");
    }
    if (stride < 1) throw InputError("occlusion_importance: stride must be >= 1");
    if (label < 0 || label >= clf.categories()) throw InputError("occlusion_importance: label out of range");
    ImportanceMap m;
    m.window_h = window_h;
    m.window_w = window_w;
    m.stride = stride;
    m.image_h = img.height;
    m.image_w = img.width;
    const int gy = (img.height - window_h) / stride + 1;
    const int gx = (img.width - window_w) / stride + 1;
    m.values.resize(gy, gx);
    const Real base = clf.scores(img)(label);
    parallel_for(static_cast<std::size_t>(gy) * gx, [&](std::size_t k) {
        const int y = static_cast<int>(k) / gx;
        const int x = static_cast<int>(k) % gx;
        RgbImage occluded = img;
        const Region w = m.window_at(y, x);
        for (int yy = w.y0; yy < w.y0 + w.height; ++yy) {
            for (int xx = w.x0; xx < w.x0 + w.width; ++xx) occluded.set(yy, xx, fill[0], fill[1], fill[2]);
        }
        m.values(y, x) = base - clf.scores(occluded)(label);
    });
    return m;
}

DenseMap rank_equalize(const DenseMap& map) {
    const Index n = map.size();
    DenseMap out(map.rows(), map.cols());
    if (n == 1) {
        out.setZero();
        return out;
    }
    std::vector<Real> sorted(map.data(), map.data() + n);
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < n; ++i) {
        const Real v = map.data()[i];
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        out.data()[i] = (static_cast<Real>(lo) + static_cast<Real>(hi - lo - 1) / 2.0) / static_cast<Real>(n - 1);
    }
    return out;
}

ImportanceOverlay mean_importance_overlay(const std::vector<ImportanceMap>& maps) {
    if (maps.empty()) throw InputError("mean_importance_overlay: no maps");
    const auto& f = maps.front();
    ImportanceOverlay out;
    out.mean = DenseMap::Zero(f.values.rows(), f.values.cols());
    for (const auto& m : maps) {
        if (m.values.rows() != f.values.rows() || m.values.cols() != f.values.cols() || m.window_h != f.window_h ||
            m.window_w != f.window_w || m.stride != f.stride) {
            throw InputError("mean_importance_overlay: maps have different geometry");
        }
        out.mean += m.values;
    }
    out.mean /= static_cast<Real>(maps.size());
    out.equalized = rank_equalize(out.mean);
    return out;
}

}  // namespace gazecap
