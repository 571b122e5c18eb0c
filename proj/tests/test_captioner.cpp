#include "grad_check.hpp"
#include "tiny_model.hpp"

#include "gazecap/captioner.hpp"
#include "gazecap/checkpoint.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace gazecap;

namespace {

CaptionerDims tiny_dims(Index vocab = 12) {
    CaptionerDims d;
    d.vocab = vocab;
    d.embed = 5;
    d.feature = 6;
    d.hidden = 8;
    d.projection = 4;
    d.output = 7;
    return d.resolved();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("gazecap_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Captioner, ForwardMatchesScalarLoops) {
    // V=5, L=4, three reference tokens.
    for (auto v : {AttentionVariant::machine, AttentionVariant::gaze_only, AttentionVariant::split}) {
        const CaptionerParams prm = oracle::random_params(tiny_dims(5), v, 3);
        const FeatureGrid img = oracle::random_grid(2, 2, 6, 11);
        const GazeHistogram gz = oracle::random_gaze(2, 2, 12);
        const std::vector<int> ref = {4, 3, Vocabulary::end};
        Tape tape;
        const SequenceLoss sl = sequence_loss(tape, img, &gz, ref, prm, 0.7);
        const auto want = oracle::scalar_sequence_loss(img, &gz, ref, prm);
        EXPECT_NEAR(sl.nll, want.nll, 1e-10) << to_string(v);
        EXPECT_NEAR(sl.reg, want.reg, 1e-10) << to_string(v);
        EXPECT_NEAR(sl.loss.item(), want.nll + 0.7 * want.reg, 1e-10) << to_string(v);
        ASSERT_EQ(sl.trace.alpha.size(), ref.size());
        for (std::size_t t = 0; t < ref.size(); ++t) {
            for (Index i = 0; i < 4; ++i) EXPECT_NEAR(sl.trace.alpha[t](i), want.alpha[t][static_cast<std::size_t>(i)], 1e-12);
        }
    }
}

TEST(Captioner, FullLossGradientsMatchFiniteDifferences) {
    CaptionerParams prm = oracle::random_params(tiny_dims(12), AttentionVariant::split, 21);
    const FeatureGrid img = oracle::random_grid(3, 3, 6, 22);
    const GazeHistogram gz = oracle::random_gaze(3, 3, 23);
    const std::vector<int> ref = {5, 7, 4, 11, Vocabulary::end};
    std::vector<std::pair<std::string, Tensor>> tensors;
    const ParameterSet set = prm.parameters();
    for (const auto& item : set.items()) tensors.emplace_back(item.name, item.tensor);
    const auto rep = oracle::check_gradients(
        [&](Tape& t) { return sequence_loss(t, img, &gz, ref, prm, 1.0).loss; }, tensors);
    for (const auto& [name, err] : rep.per_tensor) EXPECT_LT(err, 1e-4) << name;
    EXPECT_EQ(rep.per_tensor.size(), 18u);
}

TEST(Captioner, UniformModelNllIsLengthTimesLogV) {
    const CaptionerParams prm = CaptionerParams::zeros(tiny_dims(12), AttentionVariant::machine);
    const FeatureGrid img = oracle::random_grid(3, 3, 6, 1);
    const std::vector<int> ref = {4, 5, 6, Vocabulary::end};
    Tape tape;
    const SequenceLoss sl = sequence_loss(tape, img, nullptr, ref, prm, 0.0);
    EXPECT_NEAR(sl.loss.item(), 4.0 * std::log(12.0), 1e-12);
}

TEST(Captioner, OneHotAttentionRegularizerIsLMinusOne) {
    CaptionerParams prm = CaptionerParams::zeros(tiny_dims(12), AttentionVariant::machine);
    FeatureGrid img;
    img.grid_h = 3;
    img.grid_w = 3;
    img.a = Matrix::Zero(9, 6);
    img.a(4, 0) = 100.0;
    prm.attention.u_a.mutable_value()(0, 0) = 1.0;
    prm.attention.w_att.mutable_value()(0, 0) = 1000.0;
    Tape tape;
    const SequenceLoss sl = sequence_loss(tape, img, nullptr, {Vocabulary::end}, prm, 1.0);
    EXPECT_EQ(sl.trace.alpha[0](4), 1.0);
    EXPECT_EQ(sl.reg, 8.0);
}

TEST(Captioner, SequenceLossErrors) {
    const CaptionerParams split = oracle::random_params(tiny_dims(12), AttentionVariant::split, 1);
    const FeatureGrid img = oracle::random_grid(3, 3, 6, 1);
    const GazeHistogram gz = oracle::random_gaze(3, 3, 2);
    const GazeHistogram small = oracle::random_gaze(2, 2, 2);
    Tape t;
    EXPECT_THROW(sequence_loss(t, img, &gz, {}, split, 1.0), InputError);
    EXPECT_THROW(sequence_loss(t, img, &gz, {4, 5}, split, 1.0), InputError);
    EXPECT_THROW(sequence_loss(t, img, nullptr, {4, Vocabulary::end}, split, 1.0), InputError);
    EXPECT_THROW(sequence_loss(t, img, &small, {4, Vocabulary::end}, split, 1.0), InputError);
    EXPECT_THROW(sequence_loss(t, img, &gz, {40, Vocabulary::end}, split, 1.0), InputError);
    EXPECT_THROW(decode(img, &gz, split, {1, 0}), InputError);
}

TEST(Captioner, TiedSplitReproducesMachineTraining) {
    const oracle::TinyCorpus corpus = oracle::tiny_corpus(6, 3, 3, 6, 5);
    CaptionerDims d = tiny_dims(corpus.vocab.size());
    CaptionerParams machine = CaptionerParams::init(d, AttentionVariant::machine, 9);
    CaptionerParams split = CaptionerParams::init(d, AttentionVariant::split, 9, true);
    ASSERT_TRUE(split.attention.gate_weights_tied());
    ASSERT_EQ(machine.attention.w_att.value(), split.attention.w_pos.value());
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.lr = 0.01;
    Trainer tm(machine, corpus.vocab, cfg);
    Trainer ts(split, corpus.vocab, cfg);
    for (int e = 1; tm.step_losses().size() < 50; ++e) {
        tm.epoch(corpus.examples, e);
        ts.epoch(corpus.examples, e);
    }
    ASSERT_EQ(tm.step_losses().size(), ts.step_losses().size());
    for (std::size_t s = 0; s < 50; ++s) EXPECT_NEAR(tm.step_losses()[s], ts.step_losses()[s], 1e-10) << "step " << s;
    EXPECT_NE(tm.step_losses()[0], tm.step_losses()[49]);
}

TEST(Captioner, GazeOnlyWithZeroGazeAttendsUniformly) {
    const CaptionerParams prm = oracle::random_params(tiny_dims(12), AttentionVariant::gaze_only, 4, 1.0);
    const FeatureGrid img = oracle::random_grid(3, 3, 6, 8);
    GazeHistogram zero;
    zero.grid_h = 3;
    zero.grid_w = 3;
    zero.g = ColVector::Zero(9);
    const ScoredCaption cap = decode(img, &zero, prm, {3, 8});
    ASSERT_FALSE(cap.trace.alpha.empty());
    for (const auto& alpha : cap.trace.alpha) {
        for (Index i = 0; i < 9; ++i) EXPECT_NEAR(alpha(i), 1.0 / 9.0, 1e-12);
    }
}

TEST(Captioner, AttentionSumsToOneInTrainingAndDecoding) {
    for (auto v : {AttentionVariant::machine, AttentionVariant::gaze_only, AttentionVariant::split}) {
        const CaptionerParams prm = oracle::random_params(tiny_dims(12), v, 6, 2.0);
        const FeatureGrid img = oracle::random_grid(3, 3, 6, 9);
        const GazeHistogram gz = oracle::random_gaze(3, 3, 10);
        Tape tape;
        const SequenceLoss sl = sequence_loss(tape, img, &gz, {4, 5, 6, Vocabulary::end}, prm, 1.0);
        for (const auto& a : sl.trace.alpha) EXPECT_NEAR(a.sum(), 1.0, 1e-9);
        for (const auto& cap : beam_search(img, &gz, prm, {3, 10})) {
            for (const auto& a : cap.trace.alpha) EXPECT_NEAR(a.sum(), 1.0, 1e-9);
        }
    }
}

namespace {

/// Log-probability of `seq` under the model, recomputed by chaining
/// decoder steps from scratch.
Real chain_log_prob(const FeatureGrid& img, const GazeHistogram* gz, const CaptionerParams& prm,
                    const std::vector<int>& seq) {
    Tape tape(Tape::Mode::inference);
    const ImageInput in = ImageInput::make(img, gz, prm.variant());
    DecoderState s = init_state(tape, in.features, prm);
    int prev = Vocabulary::start;
    Real lp = 0.0;
    for (int y : seq) {
        StepOutput o = decoder_step(tape, in, prev, s, prm);
        lp += std::log(o.probs.value()(0, y));
        s = o.state;
        prev = y;
    }
    return lp;
}

/// Best sequence among all that end with the end token within max_len
/// steps, or run to max_len without it.
std::pair<std::vector<int>, Real> exhaustive_best(const std::function<Real(const std::vector<int>&)>& score, int vocab,
                                                  int max_len) {
    std::vector<int> best;
    Real best_lp = -INFINITY;
    std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& seq) {
        const bool done = !seq.empty() && (seq.back() == Vocabulary::end || static_cast<int>(seq.size()) == max_len);
        if (done) {
            const Real lp = score(seq);
            if (lp > best_lp) {
                best_lp = lp;
                best = seq;
            }
            return;
        }
        for (int v = 0; v < vocab; ++v) {
            seq.push_back(v);
            rec(seq);
            seq.pop_back();
        }
    };
    std::vector<int> seq;
    rec(seq);
    return {best, best_lp};
}

}  // namespace

TEST(Captioner, BeamTwoMatchesExhaustiveSearchOnTransitionTable) {
    // Word distribution depends only on the previous token: one-hot
    // embeddings, identity deep-output layer, log-transition logits.
    constexpr int V = 6;
    CaptionerDims d;
    d.vocab = V;
    d.embed = V;
    d.feature = 3;
    d.hidden = 2;
    d.projection = 2;
    d.output = V;
    CaptionerParams prm = CaptionerParams::zeros(d, AttentionVariant::machine);
    prm.embed.mutable_value() = Matrix::Identity(V, V);
    prm.out_we.mutable_value() = Matrix::Identity(V, V);
    Matrix table = Matrix::Constant(V, V, 0.01);
    // From start, the greedy choice (4) leads to a weak ending; 5 ends strongly.
    table.row(Vocabulary::start) << 0.01, 0.01, 0.02, 0.01, 0.5, 0.45;
    table.row(4) << 0.01, 0.01, 0.3, 0.01, 0.34, 0.33;
    table.row(5) << 0.01, 0.01, 0.9, 0.01, 0.04, 0.03;
    for (int r = 0; r < V; ++r) table.row(r) /= table.row(r).sum();
    prm.out_w.mutable_value() = table.array().log().matrix() / std::tanh(1.0);
    const FeatureGrid img = oracle::random_grid(2, 2, 3, 1);

    auto table_score = [&](const std::vector<int>& seq) {
        Real lp = 0.0;
        int prev = Vocabulary::start;
        for (int y : seq) {
            lp += std::log(table(prev, y));
            prev = y;
        }
        return lp;
    };
    const auto [best, best_lp] = exhaustive_best(table_score, V, 3);
    const ScoredCaption beam = decode(img, nullptr, prm, {2, 3});
    EXPECT_EQ(beam.tokens, best);
    EXPECT_NEAR(beam.total_log_prob, best_lp, 1e-12);
    EXPECT_EQ(best, (std::vector<int>{5, Vocabulary::end}));
    const ScoredCaption greedy = decode(img, nullptr, prm, {1, 3});
    EXPECT_EQ(greedy.tokens.front(), 4);
}

TEST(Captioner, WideBeamMatchesExhaustiveSearchOnRandomModel) {
    const CaptionerParams prm = oracle::random_params(tiny_dims(5), AttentionVariant::split, 13, 1.0);
    const FeatureGrid img = oracle::random_grid(2, 2, 6, 14);
    const GazeHistogram gz = oracle::random_gaze(2, 2, 15);
    const auto [best, best_lp] =
        exhaustive_best([&](const std::vector<int>& s) { return chain_log_prob(img, &gz, prm, s); }, 5, 3);
    const auto beams = beam_search(img, &gz, prm, {25, 3});
    EXPECT_EQ(beams.front().tokens, best);
    EXPECT_NEAR(beams.front().total_log_prob, best_lp, 1e-10);
    for (std::size_t k = 1; k < beams.size(); ++k) EXPECT_GE(beams[k - 1].total_log_prob, beams[k].total_log_prob);
    for (const auto& b : beams) EXPECT_NEAR(b.total_log_prob, chain_log_prob(img, &gz, prm, b.tokens), 1e-10);
}

TEST(Captioner, BeamOneIsGreedy) {
    const CaptionerParams prm = oracle::random_params(tiny_dims(12), AttentionVariant::machine, 17, 1.0);
    const FeatureGrid img = oracle::random_grid(3, 3, 6, 18);
    Tape tape(Tape::Mode::inference);
    const ImageInput in = ImageInput::make(img, nullptr, prm.variant());
    DecoderState s = init_state(tape, in.features, prm);
    std::vector<int> greedy;
    int prev = Vocabulary::start;
    for (int t = 0; t < 10 && prev != Vocabulary::end; ++t) {
        StepOutput o = decoder_step(tape, in, prev, s, prm);
        Index arg = 0;
        o.probs.value().row(0).maxCoeff(&arg);
        greedy.push_back(static_cast<int>(arg));
        s = o.state;
        prev = static_cast<int>(arg);
    }
    const ScoredCaption cap = decode(img, nullptr, prm, {1, 10});
    EXPECT_EQ(cap.tokens, greedy);
    EXPECT_EQ(cap.tokens, decode(img, nullptr, prm, {1, 10}).tokens);
}

TEST(Captioner, MemorizesSingleExample) {
    oracle::TinyCorpus corpus = oracle::tiny_corpus(1, 3, 3, 6, 2);
    corpus.examples[0].captions.resize(1);
    CaptionerParams prm = CaptionerParams::init(tiny_dims(corpus.vocab.size()), AttentionVariant::machine, 3);
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.lr = 0.02;
    cfg.batch_size = 1;
    Trainer tr(prm, corpus.vocab, cfg);
    const Real first = tr.epoch(corpus.examples, 1).first;
    Real last = first;
    for (int e = 2; e <= 150; ++e) last = tr.epoch(corpus.examples, e).first;
    EXPECT_LT(last, 0.1 * first);
}

TEST(Captioner, TrainingIsDeterministicAndKeepsBestEpoch) {
    const oracle::TinyCorpus corpus = oracle::tiny_corpus(8, 3, 3, 6, 31);
    std::vector<TrainingExample> train_set(corpus.examples.begin(), corpus.examples.begin() + 6);
    std::vector<TrainingExample> val_set(corpus.examples.begin() + 6, corpus.examples.end());
    TrainConfig cfg;
    cfg.max_epochs = 6;
    cfg.patience = 3;
    cfg.batch_size = 3;
    cfg.lr = 0.01;
    const auto dir = temp_dir("det");
    std::vector<std::string> bytes;
    for (int run = 0; run < 2; ++run) {
        CaptionerParams prm = CaptionerParams::init(tiny_dims(corpus.vocab.size()), AttentionVariant::split, 7);
        const TrainResult res = train(prm, corpus.vocab, train_set, val_set, cfg);
        Real best = -1.0;
        for (const auto& row : res.log) best = std::max(best, row.val_bleu1);
        EXPECT_EQ(res.best_val_bleu1, best);
        EXPECT_EQ(validation_bleu1(val_set, prm, corpus.vocab, {1, cfg.max_len}), best);
        const auto path = dir / ("run" + std::to_string(run) + ".gzc");
        write_checkpoint(path, make_checkpoint(prm, corpus.vocab, {{"seed", "7"}}));
        bytes.push_back(slurp(path));
    }
    EXPECT_EQ(bytes[0], bytes[1]);
    std::filesystem::remove_all(dir);
}

TEST(Captioner, CheckpointRoundTrip) {
    const oracle::TinyCorpus corpus = oracle::tiny_corpus(3, 3, 3, 6, 41);
    for (bool tied : {false, true}) {
        const CaptionerParams prm =
            CaptionerParams::init(tiny_dims(corpus.vocab.size()), AttentionVariant::split, 5, tied);
        const auto dir = temp_dir("ckpt");
        write_checkpoint(dir / "m.gzc", make_checkpoint(prm, corpus.vocab, {{"lr", "0.003"}}));
        const LoadedModel m = load_model(dir / "m.gzc");
        EXPECT_EQ(m.vocab.tokens(), corpus.vocab.tokens());
        EXPECT_EQ(m.params.variant(), AttentionVariant::split);
        EXPECT_EQ(m.params.attention.gate_weights_tied(), tied);
        EXPECT_EQ(m.checkpoint.get("lr"), "0.003");
        const auto a = snapshot(prm.parameters());
        const auto b = snapshot(m.params.parameters());
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
        std::filesystem::remove_all(dir);
    }
    EXPECT_THROW(load_model("/nonexistent/model.gzc"), InputError);
}
