#include "gazecap/dataset.hpp"

#include "gazecap/jsonl.hpp"
#include "gazecap/parallel.hpp"

namespace gazecap {

ModelKind parse_model_kind(const std::string& s) {
    if (s == "saliency") return {AttentionVariant::split, GazeSource::saliency};
    const AttentionVariant v = parse_attention_variant(s);
    return {v, uses_gaze(v) ? GazeSource::fixations : GazeSource::none};
}

std::string to_string(const ModelKind& k) {
    return k.gaze == GazeSource::saliency ? "saliency" : to_string(k.variant);
}

GazeHistogram gaze_for(const ModelKind& kind, const FeatureGrid& grid, const FixationRecord* fixations,
                       const RgbImage* image, const GazeOptions& options) {
    switch (kind.gaze) {
        case GazeSource::none: break;
        case GazeSource::fixations: {
            if (fixations == nullptr) throw InputError("gaze: missing fixations");
            HistogramOptions h = options.histogram;
            h.grid_h = grid.grid_h;
            h.grid_w = grid.grid_w;
            return fixation_histogram(*fixations, options.crop, h);
        }
        case GazeSource::saliency: {
            if (image == nullptr) throw InputError("gaze: missing image for saliency");
            return histogram_from_map(bms_saliency(*image, options.bms), grid.grid_h, grid.grid_w);
        }
    }
    throw InputError("gaze: model kind " + to_string(kind) + " takes no gaze input");
}

std::vector<TrainingExample> load_examples(const DatasetPaths& paths, const std::vector<std::string>& ids,
                                           const ModelKind& kind, const GazeOptions& gaze) {
    std::map<std::string, FeatureGrid> features;
    for (auto& r : read_feature_file(paths.feature_file())) features.emplace(r.image_id, std::move(r.grid));
    std::map<std::string, std::vector<std::string>> captions;
    for (auto& c : read_references(paths.captions())) captions.emplace(c.image_id, std::move(c.captions));
    std::map<std::string, FixationRecord> fixations;
    if (kind.gaze == GazeSource::fixations) {
        for (auto& f : read_fixations(paths.fixations())) fixations.emplace(f.image_id, std::move(f));
    }

    std::vector<TrainingExample> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string& id = ids[i];
        auto f = features.find(id);
        if (f == features.end()) throw InputError("no features for image " + id);
        auto c = captions.find(id);
        if (c == captions.end()) throw InputError("no captions for image " + id);
        out[i].image_id = id;
        out[i].features = f->second;
        for (const auto& s : c->second) out[i].captions.push_back(tokenize(s));
        if (kind.gaze == GazeSource::fixations) {
            auto fx = fixations.find(id);
            if (fx == fixations.end()) throw InputError("no fixations for image " + id);
            out[i].gaze = gaze_for(kind, out[i].features, &fx->second, nullptr, gaze);
        }
    }
    if (kind.gaze == GazeSource::saliency) {
        parallel_for(ids.size(), [&](std::size_t i) {
            const RgbImage img = read_ppm(paths.image(ids[i]));
            out[i].gaze = gaze_for(kind, out[i].features, nullptr, &img, gaze);
        });
    }
    return out;
}

}  // namespace gazecap
