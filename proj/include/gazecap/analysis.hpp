#ifndef GAZECAP_ANALYSIS_HPP
#define GAZECAP_ANALYSIS_HPP

#include "gazecap/image.hpp"

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gazecap {

/// Scores an image over a fixed category list. Implementations must be
/// deterministic and safe to call concurrently.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int categories() const = 0;
    virtual RowVector scores(const RgbImage& img) const = 0;
};

/// Axis-aligned pixel rectangle [y0, y0+h) x [x0, x0+w).
struct Region {
    int y0 = 0;
    int x0 = 0;
    int height = 0;
    int width = 0;

    bool contains(int y, int x) const { return y >= y0 && y < y0 + height && x >= x0 && x < x0 + width; }
    bool intersects(const Region& o) const;
};

/// Ignores its input entirely.
class ConstantClassifier : public Classifier {
public:
    explicit ConstantClassifier(RowVector scores) : scores_(std::move(scores)) {}
    int categories() const override { return static_cast<int>(scores_.size()); }
    RowVector scores(const RgbImage&) const override { return scores_; }

private:
    RowVector scores_;
};

/// Reads only pixels inside `region`: category c scores the fraction of
/// region pixels exactly equal to palette[c].
class RegionColorClassifier : public Classifier {
public:
    RegionColorClassifier(Region region, std::vector<std::array<std::uint8_t, 3>> palette);
    int categories() const override { return static_cast<int>(palette_.size()); }
    RowVector scores(const RgbImage& img) const override;

private:
    Region region_;
    std::vector<std::array<std::uint8_t, 3>> palette_;
};

/// Single category: mean intensity of `region`.
class RegionBrightnessClassifier : public Classifier {
public:
    explicit RegionBrightnessClassifier(Region region) : region_(region) {}
    int categories() const override { return 1; }
    RowVector scores(const RgbImage& img) const override;

private:
    Region region_;
};

struct ImageLabels {
    std::vector<int> labels;
    std::vector<int> mentioned;
    std::vector<int> ignored;
};

using LabelSet = std::map<std::string, ImageLabels>;

enum class LabelSubset { all, mentioned, ignored };
LabelSubset parse_label_subset(const std::string& s);

struct NamedImage {
    std::string id;
    RgbImage image;
};

using Color = std::array<std::uint8_t, 3>;

/// Per-channel mean over all pixels of all images, rounded.
Color mean_color(const std::vector<NamedImage>& images);

/// Hidden (mask == 0) pixels replaced by `fill`.
RgbImage apply_mask(const RgbImage& img, const BooleanMap& mask, const Color& fill);

/// True when any of `labels` ranks within the top labels.size() categories
/// (ties broken toward the lower category index).
bool topk_hit(const RowVector& scores, const std::vector<int>& labels);

struct CurvePoint {
    Real ratio = 0.0;
    Real accuracy = 0.0;
    int n_images = 0;
};

/// Mean top-k accuracy over images for each visible-area ratio, where each
/// image is masked to the ratio of its highest-valued map pixels. Images
/// whose selected label subset is empty are skipped.
std::vector<CurvePoint> masked_accuracy_curve(const std::vector<NamedImage>& images,
                                              const std::map<std::string, DenseMap>& maps, const LabelSet& labels,
                                              const Classifier& clf, const std::vector<Real>& ratios,
                                              const Color& fill, LabelSubset subset = LabelSubset::all);

/// Accuracy with no masking, same skipping rule as the curve.
CurvePoint unmasked_accuracy(const std::vector<NamedImage>& images, const LabelSet& labels, const Classifier& clf,
                             LabelSubset subset = LabelSubset::all);

struct ImportanceMap {
    DenseMap values;  // one entry per occluder position
    int window_h = 0;
    int window_w = 0;
    int stride = 0;
    int image_h = 0;
    int image_w = 0;

    /// Pixel rectangle covered by the occluder at grid cell (gy, gx).
    Region window_at(int gy, int gx) const { return {gy * stride, gx * stride, window_h, window_w}; }
};

/// importance(pos) = score(label) - score(label | window at pos filled).
ImportanceMap occlusion_importance(const RgbImage& img, int label, const Classifier& clf, int window_h, int window_w,
                                   int stride, const Color& fill);

struct ImportanceOverlay {
    DenseMap mean;
    DenseMap equalized;  // rank transform to [0,1]; equal values share a rank
};

ImportanceOverlay mean_importance_overlay(const std::vector<ImportanceMap>& maps);

/// Rank-based histogram equalization: (#smaller + (#equal - 1) / 2) / (n - 1).
DenseMap rank_equalize(const DenseMap& map);

}  // namespace gazecap

#endif  // GAZECAP_ANALYSIS_HPP
