#ifndef GAZECAP_DATASET_HPP
#define GAZECAP_DATASET_HPP

#include "gazecap/captioner.hpp"
#include "gazecap/features.hpp"
#include "gazecap/gaze.hpp"
#include "gazecap/saliency.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gazecap {

/// Where the gate values of a model come from. "saliency" is the split
/// architecture fed BMS maps instead of fixations.
enum class GazeSource { none, fixations, saliency };

struct ModelKind {
    AttentionVariant variant = AttentionVariant::machine;
    GazeSource gaze = GazeSource::none;
};

/// machine | gaze_only | split | saliency
ModelKind parse_model_kind(const std::string& s);
std::string to_string(const ModelKind& k);

struct GazeOptions {
    HistogramOptions histogram;  // grid dims are overridden by the features
    CropSpec crop;
    BmsOptions bms;
};

/// Dataset directory layout: captions.jsonl, fixations.jsonl, labels.jsonl,
/// images/<id>.ppm, features.gfc, {train,val,test}.txt.
struct DatasetPaths {
    std::filesystem::path dir;
    std::filesystem::path features;  // empty: dir / "features.gfc"

    std::filesystem::path feature_file() const { return features.empty() ? dir / "features.gfc" : features; }
    std::filesystem::path captions() const { return dir / "captions.jsonl"; }
    std::filesystem::path fixations() const { return dir / "fixations.jsonl"; }
    std::filesystem::path labels() const { return dir / "labels.jsonl"; }
    std::filesystem::path image(const std::string& id) const { return dir / "images" / (id + ".ppm"); }
    std::filesystem::path split(const std::string& name) const { return dir / (name + ".txt"); }
};

/// Joins features, captions and (per `kind`) gaze for the given ids, in id
/// order. Missing records are errors naming the id.
std::vector<TrainingExample> load_examples(const DatasetPaths& paths, const std::vector<std::string>& ids,
                                           const ModelKind& kind, const GazeOptions& gaze);

GazeHistogram gaze_for(const ModelKind& kind, const FeatureGrid& grid, const FixationRecord* fixations,
                       const RgbImage* image, const GazeOptions& options);

}  // namespace gazecap

#endif  // GAZECAP_DATASET_HPP
