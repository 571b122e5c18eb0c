#ifndef GAZECAP_SYNTH_HPP
#define GAZECAP_SYNTH_HPP

#include "gazecap/analysis.hpp"
#include "gazecap/gaze.hpp"
#include "gazecap/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gazecap {

enum class ShapeType { circle, square, triangle };

struct SceneShape {
    ShapeType type = ShapeType::circle;
    int color = 0;  // index into synth_palette()
    int cell_y = 0;
    int cell_x = 0;
    Region box;     // pixel bounding box
    bool mentioned = false;
};

struct SynthOptions {
    int n_images = 100;
    int n_train = -1;  // -1: 70% of n_images
    int n_val = -1;    // -1: half of the remainder
    std::uint64_t seed = 1;
    int difficulty = 2;       // number of unmentioned distractor shapes
    Real distractor_scale = 0.5;  // smallest distractor extent relative to mentioned shapes
    Real p_fix = 0.8;         // probability a fixation targets a mentioned shape
    Real p_unattended = 0.3;  // probability one mentioned shape draws no targeted fixations
    int image_size = 64;
    int grid = 4;             // shapes are placed one per grid cell
    int fixations = 8;
    bool durations = true;
};

struct SyntheticScene {
    std::string image_id;
    RgbImage image;
    std::vector<SceneShape> shapes;
    std::vector<std::string> captions;
    FixationRecord fixations;
    ImageLabels labels;
};

struct SynthPalette {
    std::vector<std::string> names;
    std::vector<Color> colors;
};

const SynthPalette& synth_palette();
std::string to_string(ShapeType t);
int synth_category(const SceneShape& s);
int synth_category_count();

/// Reads shapes back from pixels: 4-connected runs of an exact palette color
/// are typed by how much of their bounding box they fill (square, circle,
/// triangle). Category (color, type) scores the fraction of image pixels in
/// matching components.
class SceneShapeClassifier : public Classifier {
public:
    int categories() const override { return synth_category_count(); }
    RowVector scores(const RgbImage& img) const override;
};

/// Deterministic in (options.seed, index).
SyntheticScene generate_scene(int index, const SynthOptions& options);
std::vector<SyntheticScene> generate_scenes(const SynthOptions& options);

struct SplitIds {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

SplitIds split_ids(const std::vector<SyntheticScene>& scenes, const SynthOptions& options);

/// Writes images/<id>.ppm, captions.jsonl, fixations.jsonl, labels.jsonl,
/// shapes.jsonl and train/val/test id lists. `config_echo` goes to config.txt.
void write_dataset(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes,
                   const SynthOptions& options, const std::string& config_echo);

}  // namespace gazecap

#endif  // GAZECAP_SYNTH_HPP
