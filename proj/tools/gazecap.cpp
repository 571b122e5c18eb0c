#include "gazecap/analysis.hpp"
#include "gazecap/captioner.hpp"
#include "gazecap/checkpoint.hpp"
#include "gazecap/dataset.hpp"
#include "gazecap/features.hpp"
#include "gazecap/gaze.hpp"
#include "gazecap/jsonl.hpp"
#include "gazecap/metrics.hpp"
#include "gazecap/parallel.hpp"
#include "gazecap/run_config.hpp"
#include "gazecap/saliency.hpp"
#include "gazecap/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace gazecap;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<ConfigKey> keys;
    std::function<void(const RunConfig&)> run;
};

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

const std::string& required(const RunConfig& cfg, const std::string& key) {
    const std::string& v = cfg.get(key);
    if (v.empty()) throw UsageError("missing required option " + flag_name(key));
    return v;
}

std::ofstream open_text(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<Real>::max_digits10);
    return out;
}

void write_sidecar(const fs::path& artifact, const RunConfig& cfg) {
    auto out = open_text(fs::path(artifact.string() + ".config"));
    out << cfg.echo();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Color parse_fill(const std::string& s, const std::vector<NamedImage>& images) {
    if (s == "mean") return mean_color(images);
    const auto parts = split_list(s);
    if (parts.size() != 3) throw UsageError("fill must be 'mean' or 'r,g,b'");
    Color c{};
    for (int i = 0; i < 3; ++i) {
        const int v = std::stoi(parts[static_cast<std::size_t>(i)]);
        if (v < 0 || v > 255) throw UsageError("fill components must lie in 0..255");
        c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    return c;
}

std::vector<std::string> ids_for(const RunConfig& cfg, const DatasetPaths& paths) {
    const std::string& split = cfg.get("split");
    if (split.empty() || split == "all") {
        std::vector<std::string> ids;
        for (const auto& r : read_references(paths.captions())) ids.push_back(r.image_id);
        return ids;
    }
    return read_id_list(paths.split(split));
}

std::vector<NamedImage> load_images(const DatasetPaths& paths, const std::vector<std::string>& ids) {
    std::vector<NamedImage> out(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) { out[i] = {ids[i], read_ppm(paths.image(ids[i]))}; });
    return out;
}

GazeOptions gaze_options(const RunConfig& cfg) {
    GazeOptions g;
    g.histogram.smoothing_sigma = cfg.get_real("hist_sigma");
    g.bms.step = static_cast<int>(cfg.get_int("bms_step"));
    g.bms.blur_sigma = cfg.get_real("bms_blur");
    return g;
}

GazeOptions gaze_options(const Checkpoint& ck) {
    GazeOptions g;
    g.histogram.smoothing_sigma = std::stod(ck.get("hist_sigma"));
    g.bms.step = std::stoi(ck.get("bms_step"));
    g.bms.blur_sigma = std::stod(ck.get("bms_blur"));
    return g;
}

// ---------------------------------------------------------------- synth

void run_synth(const RunConfig& cfg) {
    const fs::path out = required(cfg, "out");
    SynthOptions o;
    o.n_images = static_cast<int>(cfg.get_int("n_images"));
    o.n_train = static_cast<int>(cfg.get_int("n_train"));
    o.n_val = static_cast<int>(cfg.get_int("n_val"));
    o.seed = cfg.get_u64("seed");
    o.difficulty = static_cast<int>(cfg.get_int("difficulty"));
    o.p_fix = cfg.get_real("p_fix");
    o.p_unattended = cfg.get_real("p_unattended");
    o.distractor_scale = cfg.get_real("distractor_scale");
    o.image_size = static_cast<int>(cfg.get_int("image_size"));
    o.grid = static_cast<int>(cfg.get_int("grid"));
    o.fixations = static_cast<int>(cfg.get_int("fixations"));
    o.durations = cfg.get_bool("durations");
    const int fgrid = static_cast<int>(cfg.get_int("feature_grid"));
    if (o.n_images < 1) throw UsageError("--n-images must be at least 1");

    const auto scenes = generate_scenes(o);
    write_dataset(out, scenes, o, cfg.echo());
    std::vector<FeatureRecord> feats(scenes.size());
    parallel_for(scenes.size(), [&](std::size_t i) {
        feats[i] = {scenes[i].image_id, toy_extract(scenes[i].image, fgrid, fgrid)};
    });
    write_feature_file(out / "features.gfc", feats);
    std::cout << "wrote " << scenes.size() << " scenes to " << out.string() << "\n";
}

// ---------------------------------------------------------------- extract

void run_extract(const RunConfig& cfg) {
    const fs::path images = required(cfg, "images");
    const fs::path out = required(cfg, "out");
    const int gh = static_cast<int>(cfg.get_int("grid_h"));
    const int gw = static_cast<int>(cfg.get_int("grid_w"));
    std::vector<std::string> ids;
    if (!cfg.get("ids").empty()) {
        ids = read_id_list(cfg.get("ids"));
    } else {
        for (const auto& e : fs::directory_iterator(images)) {
            if (e.path().extension() == ".ppm") ids.push_back(e.path().stem().string());
        }
        std::sort(ids.begin(), ids.end());
    }
    if (ids.empty()) throw InputError("no images found in " + images.string());
    std::vector<FeatureRecord> recs(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        recs[i] = {ids[i], toy_extract(read_ppm(images / (ids[i] + ".ppm")), gh, gw)};
    });
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_feature_file(out, recs);
    write_sidecar(out, cfg);
    std::cout << "extracted " << recs.size() << " feature grids (" << gh << "x" << gw << "x" << kToyFeatureDim
              << ") to " << out.string() << "\n";
}

// ---------------------------------------------------------------- train

void run_train(const RunConfig& cfg) {
    DatasetPaths paths{required(cfg, "data"), cfg.get("features")};
    const fs::path out = required(cfg, "out");
    const fs::path log_path = cfg.get("log").empty() ? fs::path(out.string() + ".log.csv") : fs::path(cfg.get("log"));
    const ModelKind kind = parse_model_kind(cfg.get("variant"));
    const GazeOptions gaze = gaze_options(cfg);

    const auto train_set = load_examples(paths, read_id_list(paths.split(cfg.get("train_split"))), kind, gaze);
    const auto val_set = load_examples(paths, read_id_list(paths.split(cfg.get("val_split"))), kind, gaze);
    if (train_set.empty() || val_set.empty()) throw InputError("train and validation splits must be non-empty");

    std::vector<Tokens> captions;
    for (const auto& ex : train_set) captions.insert(captions.end(), ex.captions.begin(), ex.captions.end());
    const Vocabulary vocab = Vocabulary::build(captions, static_cast<int>(cfg.get_int("min_freq")));

    CaptionerDims dims;
    dims.vocab = vocab.size();
    dims.embed = cfg.get_int("embed");
    dims.feature = train_set.front().features.dim();
    dims.hidden = cfg.get_int("hidden");
    dims.projection = cfg.get_int("projection");
    dims.output = cfg.get_int("output");

    TrainConfig tc;
    tc.lr = cfg.get_real("lr");
    tc.batch_size = static_cast<int>(cfg.get_int("batch_size"));
    tc.max_epochs = static_cast<int>(cfg.get_int("max_epochs"));
    tc.lambda = cfg.get_real("lambda");
    tc.clip_norm = cfg.get_real("clip_norm");
    tc.patience = static_cast<int>(cfg.get_int("patience"));
    tc.seed = cfg.get_u64("seed");
    tc.max_len = static_cast<int>(cfg.get_int("max_len"));
    if (tc.lambda < 0.0) throw UsageError("--lambda must be non-negative");

    CaptionerParams params = CaptionerParams::init(dims, kind.variant, tc.seed, cfg.get_bool("tie_gate_weights"));
    const bool wall = cfg.get_bool("record_wall_time");
    auto log = open_text(log_path);
    std::istringstream echo(cfg.echo());
    for (std::string line; std::getline(echo, line);) log << "# " << line << "\n";
    log << "epoch,train_nll,train_reg,val_bleu1,wall_seconds\n";
    const auto result = train(params, vocab, train_set, val_set, tc, [&](const EpochLog& e, const CaptionerParams&) {
        log << e.epoch << ',' << e.train_nll << ',' << e.train_reg << ',' << e.val_bleu1 << ','
            << (wall ? e.wall_seconds : 0.0) << "\n";
        log.flush();
        std::printf("epoch %3d  nll %.4f  reg %.4f  val BLEU-1 %.4f\n", e.epoch, e.train_nll, e.train_reg,
                    e.val_bleu1);
        std::fflush(stdout);
    });
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_checkpoint(out, make_checkpoint(params, vocab, cfg.items()));
    std::printf("best epoch %d, val BLEU-1 %.4f; checkpoint %s\n", result.best_epoch, result.best_val_bleu1,
                out.string().c_str());
}

// ---------------------------------------------------------------- caption

struct ModelContext {
    LoadedModel model;
    ModelKind kind;
    GazeOptions gaze;
};

ModelContext open_model(const fs::path& path) {
    ModelContext m{load_model(path), {}, {}};
    m.kind = parse_model_kind(m.model.checkpoint.get("variant"));
    m.gaze = gaze_options(m.model.checkpoint);
    return m;
}

void run_caption(const RunConfig& cfg) {
    const ModelContext m = open_model(required(cfg, "model"));
    DatasetPaths paths{required(cfg, "data"), cfg.get("features")};
    const fs::path out = required(cfg, "out");
    const auto examples = load_examples(paths, ids_for(cfg, paths), m.kind, m.gaze);
    const DecodeOptions opts{static_cast<int>(cfg.get_int("beam")), static_cast<int>(cfg.get_int("max_len"))};
    const auto decoded = caption_all(examples, m.model.params, opts);
    std::vector<std::pair<std::string, std::string>> cands;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        cands.emplace_back(examples[i].image_id, join(m.model.vocab.decode(decoded[i].tokens)));
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_candidates(out, cands);
    write_sidecar(out, cfg);
    std::cout << "captioned " << cands.size() << " images to " << out.string() << "\n";
}

// ---------------------------------------------------------------- eval

std::vector<EvalPair> eval_pairs(const std::vector<CaptionSet>& refs, const fs::path& candidates) {
    std::map<std::string, const CaptionSet*> by_id;
    for (const auto& r : refs) by_id[r.image_id] = &r;
    std::vector<EvalPair> pairs;
    for (const auto& [id, cap] : read_candidates(candidates)) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError(candidates.string() + ": no references for image " + id);
        EvalPair p{id, tokenize(cap), {}};
        for (const auto& r : it->second->captions) p.references.push_back(tokenize(r));
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw InputError(candidates.string() + ": no candidates");
    return pairs;
}

void run_eval(const RunConfig& cfg) {
    const auto refs = read_references(required(cfg, "references"));
    const auto files = split_list(required(cfg, "candidates"));
    auto names = split_list(cfg.get("names"));
    if (names.empty()) {
        for (const auto& f : files) names.push_back(fs::path(f).stem().string());
    }
    if (names.size() != files.size()) throw UsageError("--names must list one name per candidates file");
    const std::string sm = cfg.get("smoothing");
    if (sm != "none" && sm != "epsilon") throw UsageError("--smoothing must be none or epsilon");
    const BleuSmoothing smoothing = sm == "epsilon" ? BleuSmoothing::epsilon : BleuSmoothing::none;

    std::vector<MetricRow> rows;
    std::vector<std::size_t> counts;
    for (const auto& f : files) {
        const auto pairs = eval_pairs(refs, f);
        rows.push_back(evaluate_all(pairs, smoothing));
        counts.push_back(pairs.size());
    }
    std::size_t width = 5;
    for (const auto& n : names) width = std::max(width, n.size());
    std::printf("%-*s  BLEU-1  BLEU-2  BLEU-3  BLEU-4  ROUGE-L   CIDEr\n", static_cast<int>(width), "Model");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::printf("%-*s  %6.3f  %6.3f  %6.3f  %6.3f  %7.3f  %6.3f\n", static_cast<int>(width), names[i].c_str(),
                    r.bleu[0], r.bleu[1], r.bleu[2], r.bleu[3], r.rouge_l, r.cider);
    }
    if (!cfg.get("out").empty()) {
        auto out = open_text(cfg.get("out"));
        std::istringstream echo(cfg.echo());
        for (std::string line; std::getline(echo, line);) out << "# " << line << "\n";
        out << "model,bleu1,bleu2,bleu3,bleu4,rouge_l,cider,n_images\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            out << names[i] << ',' << r.bleu[0] << ',' << r.bleu[1] << ',' << r.bleu[2] << ',' << r.bleu[3] << ','
                << r.rouge_l << ',' << r.cider << ',' << counts[i] << "\n";
        }
    }
}

// ---------------------------------------------------------------- word-pr

void write_header(std::ostream& out, const RunConfig& cfg) {
    std::istringstream echo(cfg.echo());
    for (std::string line; std::getline(echo, line);) out << "# " << line << "\n";
}

void run_word_pr(const RunConfig& cfg) {
    const auto refs = read_references(required(cfg, "references"));
    const fs::path out_path = required(cfg, "out");
    const int min_freq = static_cast<int>(cfg.get_int("min_freq"));
    const auto rows = word_pr(eval_pairs(refs, required(cfg, "candidates")), min_freq);
    auto out = open_text(out_path);
    write_header(out, cfg);
    out << "word,precision,recall,f_score,support\n";
    for (const auto& r : rows) {
        out << r.word << ',';
        if (r.precision_defined) out << r.precision;
        out << ',' << r.recall << ',' << r.f_score << ',' << r.support << "\n";
    }
    std::cout << rows.size() << " words with support > " << min_freq << "\n";

    if (!cfg.get("baseline").empty()) {
        const auto base = word_pr(eval_pairs(refs, cfg.get("baseline")), min_freq);
        const auto delta = word_pr_delta(base, rows, cfg.get_real("threshold"));
        const fs::path dpath = cfg.get("delta").empty() ? fs::path(out_path.string() + ".delta.csv")
                                                        : fs::path(cfg.get("delta"));
        auto d = open_text(dpath);
        write_header(d, cfg);
        d << "word,change\n";
        for (const auto& w : delta.improved) d << w << ",improved\n";
        for (const auto& w : delta.degraded) d << w << ",degraded\n";
        std::cout << delta.improved.size() << " improved, " << delta.degraded.size() << " degraded vs baseline\n";
    }
}

// ---------------------------------------------------------------- mask-analysis

std::unique_ptr<Classifier> make_classifier(const std::string& name) {
    if (name == "shapes") return std::make_unique<SceneShapeClassifier>();
    if (name == "constant") {
        return std::make_unique<ConstantClassifier>(RowVector::Zero(synth_category_count()));
    }
    throw UsageError("--classifier must be shapes or constant");
}

std::vector<Real> ratio_grid(Real step) {
    if (!(step > 0.0 && step <= 1.0)) throw UsageError("--ratio-step must lie in (0,1]");
    std::vector<Real> r;
    const int n = static_cast<int>(std::lround(1.0 / step));
    for (int k = 1; k <= n; ++k) r.push_back(std::min(1.0, static_cast<Real>(k) / n));
    if (r.back() < 1.0) r.push_back(1.0);
    return r;
}

void run_mask_analysis(const RunConfig& cfg) {
    DatasetPaths paths{required(cfg, "data"), {}};
    const fs::path out_path = required(cfg, "out");
    const auto ids = ids_for(cfg, paths);
    const auto images = load_images(paths, ids);
    const LabelSet labels = read_labels(paths.labels());
    const auto clf = make_classifier(cfg.get("classifier"));
    const LabelSubset subset = parse_label_subset(cfg.get("subset"));
    const Color fill = parse_fill(cfg.get("fill"), images);
    const std::string kind = cfg.get("maps");

    std::map<std::string, FixationRecord> fix;
    if (kind == "fixation") {
        for (auto& f : read_fixations(paths.fixations())) fix.emplace(f.image_id, std::move(f));
    } else if (kind != "center" && kind != "bms") {
        throw UsageError("--maps must be fixation, center or bms");
    }
    const Real sigma = cfg.get_real("density_sigma");
    std::vector<DenseMap> dense(images.size());
    parallel_for(images.size(), [&](std::size_t i) {
        const RgbImage& img = images[i].image;
        if (kind == "center") {
            dense[i] = center_map(img.height, img.width);
        } else if (kind == "bms") {
            dense[i] = bms_saliency(img);
        } else {
            auto it = fix.find(images[i].id);
            if (it == fix.end()) throw InputError("no fixations for image " + images[i].id);
            dense[i] = fixation_density(it->second, img.height, img.width, sigma * std::max(img.height, img.width));
        }
    });
    std::map<std::string, DenseMap> maps;
    for (std::size_t i = 0; i < images.size(); ++i) maps.emplace(images[i].id, std::move(dense[i]));

    const auto curve =
        masked_accuracy_curve(images, maps, labels, *clf, ratio_grid(cfg.get_real("ratio_step")), fill, subset);
    auto out = open_text(out_path);
    write_header(out, cfg);
    out << "ratio,accuracy,n_images\n";
    for (const auto& p : curve) out << p.ratio << ',' << p.accuracy << ',' << p.n_images << "\n";
    const auto base = unmasked_accuracy(images, labels, *clf, subset);
    std::printf("unmasked accuracy %.4f over %d images\n", base.accuracy, base.n_images);
}

// ---------------------------------------------------------------- occlusion

void run_occlusion(const RunConfig& cfg) {
    DatasetPaths paths{required(cfg, "data"), {}};
    const fs::path out_dir = required(cfg, "out");
    const auto ids = ids_for(cfg, paths);
    const auto images = load_images(paths, ids);
    const LabelSet labels = read_labels(paths.labels());
    const auto clf = make_classifier(cfg.get("classifier"));
    const LabelSubset subset = parse_label_subset(cfg.get("subset"));
    const Color fill = parse_fill(cfg.get("fill"), images);
    const int window = static_cast<int>(cfg.get_int("window"));
    const int stride = static_cast<int>(cfg.get_int("stride"));

    struct Job {
        std::size_t image;
        int label;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto it = labels.find(images[i].id);
        if (it == labels.end()) throw InputError("no labels for image " + images[i].id);
        const auto& l = subset == LabelSubset::mentioned ? it->second.mentioned
                        : subset == LabelSubset::ignored ? it->second.ignored
                                                         : it->second.labels;
        for (int c : l) jobs.push_back({i, c});
    }
    if (jobs.empty()) throw InputError("no (image, label) pairs to occlude");
    std::vector<ImportanceMap> maps(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t k) {
        maps[k] = occlusion_importance(images[jobs[k].image].image, jobs[k].label, *clf, window, window, stride, fill);
    });

    fs::create_directories(out_dir);
    const std::string echo = cfg.echo();
    auto emit = [&](const std::string& stem, const std::vector<ImportanceMap>& group) {
        const ImportanceOverlay ov = mean_importance_overlay(group);
        write_csv_grid(out_dir / (stem + "_mean.csv"), ov.mean, echo);
        write_csv_grid(out_dir / (stem + "_equalized.csv"), ov.equalized, echo);
        write_pgm8(out_dir / (stem + ".pgm"), ov.equalized, echo);
    };
    emit("all", maps);
    std::map<int, std::vector<ImportanceMap>> by_label;
    for (std::size_t k = 0; k < jobs.size(); ++k) by_label[jobs[k].label].push_back(maps[k]);
    for (const auto& [label, group] : by_label) emit("label_" + std::to_string(label), group);
    std::cout << maps.size() << " importance maps over " << by_label.size() << " labels in " << out_dir.string()
              << "\n";
}

// ---------------------------------------------------------------- bms

void run_bms(const RunConfig& cfg) {
    const fs::path out = required(cfg, "out");
    BmsOptions opts;
    opts.step = static_cast<int>(cfg.get_int("step"));
    opts.blur_sigma = cfg.get_real("blur");
    std::vector<std::pair<std::string, fs::path>> inputs;
    if (!cfg.get("image").empty()) {
        inputs.emplace_back(fs::path(cfg.get("image")).stem().string(), cfg.get("image"));
    } else {
        DatasetPaths paths{required(cfg, "data"), {}};
        for (const auto& id : ids_for(cfg, paths)) inputs.emplace_back(id, paths.image(id));
    }
    fs::create_directories(out);
    const std::string echo = cfg.echo();
    parallel_for(inputs.size(), [&](std::size_t i) {
        const DenseMap s = bms_saliency(read_ppm(inputs[i].second), opts);
        write_pgm8(out / (inputs[i].first + ".pgm"), s, echo);
        write_csv_grid(out / (inputs[i].first + ".csv"), s, echo);
    });
    std::cout << "saliency maps for " << inputs.size() << " images in " << out.string() << "\n";
}

// ---------------------------------------------------------------- attention-maps

void run_attention_maps(const RunConfig& cfg) {
    const ModelContext m = open_model(required(cfg, "model"));
    DatasetPaths paths{required(cfg, "data"), cfg.get("features")};
    const std::string id = required(cfg, "image_id");
    const fs::path out = required(cfg, "out");
    const auto ex = load_examples(paths, {id}, m.kind, m.gaze).front();
    const RgbImage img = read_ppm(paths.image(id));
    const DecodeOptions opts{static_cast<int>(cfg.get_int("beam")), static_cast<int>(cfg.get_int("max_len"))};
    const ScoredCaption cap = decode(ex.features, ex.gaze ? &*ex.gaze : nullptr, m.model.params, opts);

    DenseMap gray(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            gray(y, x) = (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / (3.0 * 255.0);
        }
    }
    fs::create_directories(out);
    const std::string echo = cfg.echo();
    auto csv = open_text(out / "attention.csv");
    write_header(csv, cfg);
    csv << "step,word";
    for (Index i = 0; i < ex.features.regions(); ++i) csv << ",alpha_" << i;
    csv << "\n";
    for (std::size_t t = 0; t < cap.tokens.size(); ++t) {
        const ColVector& alpha = cap.trace.alpha[t];
        DenseMap cells(ex.features.grid_h, ex.features.grid_w);
        for (Index i = 0; i < alpha.size(); ++i) cells(i / ex.features.grid_w, i % ex.features.grid_w) = alpha(i);
        const DenseMap heat = resize_nearest(cells / cells.maxCoeff(), img.height, img.width);
        char name[32];
        std::snprintf(name, sizeof name, "step_%02zu.pgm", t);
        write_pgm8(out / name, (0.3 * gray + 0.7 * heat).eval(), echo);
        csv << t << ',' << m.model.vocab.token(cap.tokens[t]);
        for (Index i = 0; i < alpha.size(); ++i) csv << ',' << alpha(i);
        csv << "\n";
    }
    std::cout << join(m.model.vocab.decode(cap.tokens)) << "\n";
}

// ---------------------------------------------------------------- registry

std::vector<ConfigKey> gaze_keys() {
    return {{"hist_sigma", "0", "fixation histogram smoothing, in grid cells"},
            {"bms_step", "8", "BMS threshold step (saliency variant)"},
            {"bms_blur", "-1", "BMS blur sigma in pixels; negative for 0.03*max(h,w)"}};
}

std::vector<Command> commands() {
    std::vector<Command> c;
    c.push_back({"synth", "Generate a synthetic shapes dataset",
                 {{"out", "", "output directory"},
                  {"n_images", "100", "number of scenes"},
                  {"n_train", "-1", "training scenes (-1: 70%)"},
                  {"n_val", "-1", "validation scenes (-1: half the rest)"},
                  {"seed", "1", "random seed"},
                  {"difficulty", "2", "distractor shapes per scene"},
                  {"p_fix", "0.8", "probability a fixation targets a mentioned shape"},
                  {"p_unattended", "0.3", "probability one mentioned shape draws no targeted fixation"},
                  {"distractor_scale", "0.5", "smallest distractor size relative to mentioned shapes"},
                  {"image_size", "64", "image side in pixels"},
                  {"grid", "4", "placement grid"},
                  {"fixations", "8", "fixations per scene"},
                  {"durations", "1", "emit fixation durations"},
                  {"feature_grid", "4", "grid of the emitted feature file"}},
                 run_synth});
    c.push_back({"extract", "Compute toy feature grids for a directory of PPM images",
                 {{"images", "", "image directory"},
                  {"ids", "", "optional id list; default all *.ppm"},
                  {"out", "", "feature file"},
                  {"grid_h", "4", "grid rows"},
                  {"grid_w", "4", "grid columns"}},
                 run_extract});
    std::vector<ConfigKey> train_keys = {{"data", "", "dataset directory"},
                                         {"features", "", "feature file (default DATA/features.gfc)"},
                                         {"out", "", "checkpoint path"},
                                         {"log", "", "training log CSV (default OUT.log.csv)"},
                                         {"variant", "split", "machine, gaze_only, split or saliency"},
                                         {"train_split", "train", "training id list name"},
                                         {"val_split", "val", "validation id list name"},
                                         {"embed", "32", "word embedding width"},
                                         {"hidden", "64", "LSTM width"},
                                         {"projection", "0", "attention projection width (0: feature dim)"},
                                         {"output", "0", "deep output width (0: embed)"},
                                         {"tie_gate_weights", "0", "share fixated and non-fixated weights"},
                                         {"lambda", "1.0", "attention regularizer weight"},
                                         {"lr", "0.003", "Adam learning rate"},
                                         {"batch_size", "16", "captions per step"},
                                         {"max_epochs", "40", "epoch limit"},
                                         {"patience", "10", "early stopping patience"},
                                         {"clip_norm", "5.0", "global gradient norm limit"},
                                         {"seed", "1", "random seed"},
                                         {"max_len", "20", "decode length limit for validation"},
                                         {"min_freq", "2", "vocabulary frequency threshold"},
                                         {"record_wall_time", "1", "0 writes zeros in the wall_seconds column"}};
    for (auto& k : gaze_keys()) train_keys.push_back(k);
    c.push_back({"train", "Train a captioner", train_keys, run_train});
    c.push_back({"caption", "Caption images with a trained model",
                 {{"model", "", "checkpoint"},
                  {"data", "", "dataset directory"},
                  {"features", "", "feature file (default DATA/features.gfc)"},
                  {"split", "test", "id list name, or 'all'"},
                  {"out", "", "candidates JSONL"},
                  {"beam", "1", "beam width (1: greedy)"},
                  {"max_len", "20", "decode length limit"}},
                 run_caption});
    c.push_back({"eval", "Score candidate captions against references",
                 {{"references", "", "reference captions JSONL"},
                  {"candidates", "", "comma-separated candidate JSONL files"},
                  {"names", "", "comma-separated model names (default file stems)"},
                  {"smoothing", "none", "BLEU smoothing: none or epsilon"},
                  {"out", "", "optional comparison CSV"}},
                 run_eval});
    c.push_back({"word-pr", "Per-word precision and recall",
                 {{"references", "", "reference captions JSONL"},
                  {"candidates", "", "candidate JSONL"},
                  {"baseline", "", "optional baseline candidates for a delta list"},
                  {"min_freq", "10", "report words with support above this"},
                  {"threshold", "0.05", "F-score change counted as improved or degraded"},
                  {"out", "", "CSV path"},
                  {"delta", "", "delta CSV (default OUT.delta.csv)"}},
                 run_word_pr});
    c.push_back({"mask-analysis", "Top-k accuracy against visible-area ratio",
                 {{"data", "", "dataset directory"},
                  {"split", "all", "id list name, or 'all'"},
                  {"maps", "fixation", "fixation, center or bms"},
                  {"subset", "all", "all, mentioned or ignored labels"},
                  {"classifier", "shapes", "shapes or constant"},
                  {"ratio_step", "0.05", "visible-ratio increment"},
                  {"density_sigma", "0.05", "fixation blur relative to max(h,w)"},
                  {"fill", "mean", "hidden pixel color: mean or r,g,b"},
                  {"out", "", "curve CSV"}},
                 run_mask_analysis});
    c.push_back({"occlusion", "Occlusion importance maps",
                 {{"data", "", "dataset directory"},
                  {"split", "all", "id list name, or 'all'"},
                  {"subset", "mentioned", "all, mentioned or ignored labels"},
                  {"classifier", "shapes", "shapes or constant"},
                  {"window", "16", "occluder side in pixels"},
                  {"stride", "4", "occluder stride in pixels"},
                  {"fill", "mean", "occluder color: mean or r,g,b"},
                  {"out", "", "output directory"}},
                 run_occlusion});
    c.push_back({"bms", "Boolean map saliency",
                 {{"image", "", "single PPM image"},
                  {"data", "", "dataset directory (when no --image)"},
                  {"split", "all", "id list name, or 'all'"},
                  {"step", "8", "threshold step"},
                  {"blur", "-1", "blur sigma in pixels; negative for 0.03*max(h,w)"},
                  {"out", "", "output directory"}},
                 run_bms});
    c.push_back({"attention-maps", "Per-step attention overlays for one image",
                 {{"model", "", "checkpoint"},
                  {"data", "", "dataset directory"},
                  {"features", "", "feature file (default DATA/features.gfc)"},
                  {"image_id", "", "image to caption"},
                  {"beam", "1", "beam width"},
                  {"max_len", "20", "decode length limit"},
                  {"out", "", "output directory"}},
                 run_attention_maps});
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaze-assisted attention captioning toolkit"};
    app.require_subcommand(1);
    auto cmds = commands();

    struct Bound {
        CLI::App* sub;
        std::string config_path;
        std::map<std::string, std::string> flags;
    };
    std::vector<Bound> bound(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        bound[i].sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        bound[i].sub->add_option("--config", bound[i].config_path, "key=value config file");
        for (const auto& k : cmds[i].keys) {
            std::string help = k.help;
            if (!k.default_value.empty()) help += " [" + k.default_value + "]";
            bound[i].sub->add_option(flag_name(k.name), bound[i].flags[k.name], help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (!bound[i].sub->parsed()) continue;
        RunConfig cfg(cmds[i].keys);
        try {
            try {
                if (!bound[i].config_path.empty()) cfg.load_file(bound[i].config_path);
            } catch (const InputError& e) {
                throw UsageError(e.what());
            }
            for (const auto& k : cmds[i].keys) {
                if (bound[i].sub->count(flag_name(k.name)) > 0) cfg.set(k.name, bound[i].flags[k.name]);
            }
            cmds[i].run(cfg);
        } catch (const UsageError& e) {
            std::cerr << "error: " << e.what() << "\n\n" << bound[i].sub->help();
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }
    return 2;
}
