#include "gazecap/captioner.hpp"

#include "gazecap/metrics.hpp"
#include "gazecap/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace gazecap {

CaptionerDims CaptionerDims::resolved() const {
    CaptionerDims d = *this;
    if (d.projection <= 0) d.projection = d.feature;
    if (d.output <= 0) d.output = d.embed;
    if (d.vocab <= 0 || d.embed <= 0 || d.feature <= 0 || d.hidden <= 0) {
        throw InputError("captioner: all dimensions must be positive");
    }
    return d;
}

CaptionerParams CaptionerParams::init(const CaptionerDims& dims_in, AttentionVariant variant, std::uint64_t seed,
                                      bool tie_gate_weights) {
    const CaptionerDims d = dims_in.resolved();
    CaptionerParams p;
    p.dims = d;
    auto w = [&](Index r, Index c, const char* name) { return Tensor::parameter(glorot_uniform(r, c, seed, name)); };
    auto zero = [](Index r, Index c) { return Tensor::parameter(Matrix::Zero(r, c)); };
    p.embed = w(d.vocab, d.embed, "embed");
    p.lstm_wx = w(d.embed + d.feature, 4 * d.hidden, "lstm.wx");
    p.lstm_wh = w(d.hidden, 4 * d.hidden, "lstm.wh");
    p.lstm_b = zero(1, 4 * d.hidden);
    p.init_h_w = w(d.feature, d.hidden, "init.h_w");
    p.init_h_b = zero(1, d.hidden);
    p.init_c_w = w(d.feature, d.hidden, "init.c_w");
    p.init_c_b = zero(1, d.hidden);
    p.out_we = w(d.embed, d.output, "out.we");
    p.out_wh = w(d.hidden, d.output, "out.wh");
    p.out_wz = w(d.feature, d.output, "out.wz");
    p.out_w = w(d.output, d.vocab, "out.w");
    p.attention = AttentionParams::init(variant, {d.feature, d.hidden, d.projection}, seed, tie_gate_weights);
    return p;
}

CaptionerParams CaptionerParams::zeros(const CaptionerDims& dims_in, AttentionVariant variant, bool tie_gate_weights) {
    const CaptionerDims d = dims_in.resolved();
    CaptionerParams p;
    p.dims = d;
    auto zero = [](Index r, Index c) { return Tensor::parameter(Matrix::Zero(r, c)); };
    p.embed = zero(d.vocab, d.embed);
    p.lstm_wx = zero(d.embed + d.feature, 4 * d.hidden);
    p.lstm_wh = zero(d.hidden, 4 * d.hidden);
    p.lstm_b = zero(1, 4 * d.hidden);
    p.init_h_w = zero(d.feature, d.hidden);
    p.init_h_b = zero(1, d.hidden);
    p.init_c_w = zero(d.feature, d.hidden);
    p.init_c_b = zero(1, d.hidden);
    p.out_we = zero(d.embed, d.output);
    p.out_wh = zero(d.hidden, d.output);
    p.out_wz = zero(d.feature, d.output);
    p.out_w = zero(d.output, d.vocab);
    p.attention = AttentionParams::zeros(variant, {d.feature, d.hidden, d.projection});
    if (tie_gate_weights) p.attention.w_neg = p.attention.w_pos;
    return p;
}

ParameterSet CaptionerParams::parameters() const {
    ParameterSet s;
    s.add("embed", embed);
    s.add("lstm.wx", lstm_wx);
    s.add("lstm.wh", lstm_wh);
    s.add("lstm.b", lstm_b);
    s.add("init.h_w", init_h_w);
    s.add("init.h_b", init_h_b);
    s.add("init.c_w", init_c_w);
    s.add("init.c_b", init_c_b);
    s.add("out.we", out_we);
    s.add("out.wh", out_wh);
    s.add("out.wz", out_wz);
    s.add("out.w", out_w);
    attention.register_parameters(s);
    return s;
}

std::vector<Matrix> snapshot(const ParameterSet& params) {
    std::vector<Matrix> out;
    out.reserve(params.size());
    for (const auto& p : params.items()) out.push_back(p.tensor.value());
    return out;
}

void restore(ParameterSet& params, const std::vector<Matrix>& values) {
    if (values.size() != params.size()) throw ShapeError("restore: parameter count mismatch");
    std::size_t k = 0;
    for (const auto& item : params.items()) {
        Tensor t = item.tensor;
        if (t.rows() != values[k].rows() || t.cols() != values[k].cols()) {
            throw ShapeError("restore: shape mismatch for " + item.name);
        }
        t.mutable_value() = values[k++];
    }
}

ImageInput ImageInput::make(const FeatureGrid& grid, const GazeHistogram* gaze, AttentionVariant variant) {
    ImageInput in;
    in.features = Tensor::constant(grid.a);
    if (uses_gaze(variant)) {
        if (gaze == nullptr) throw InputError("attention variant " + to_string(variant) + " requires gaze input");
        if (gaze->regions() != grid.regions()) {
            throw InputError("gaze histogram has " + std::to_string(gaze->regions()) + " cells, features have " +
                             std::to_string(grid.regions()) + " regions");
        }
        in.gaze = Tensor::constant(gaze->g);
    }
    return in;
}

DecoderState init_state(Tape& tape, const Tensor& features, const CaptionerParams& params) {
    Tensor mean = affine(tape, sum(tape, features, 0), 1.0 / static_cast<Real>(features.rows()), 0.0);
    DecoderState s;
    s.h = tanh(tape, add(tape, matmul(tape, mean, params.init_h_w), params.init_h_b));
    s.c = tanh(tape, add(tape, matmul(tape, mean, params.init_c_w), params.init_c_b));
    return s;
}

DecoderState lstm_step(Tape& tape, const Tensor& x, const DecoderState& prev, const CaptionerParams& params) {
    const Index h = params.dims.hidden;
    Tensor gates = add(tape, add(tape, matmul(tape, x, params.lstm_wx), matmul(tape, prev.h, params.lstm_wh)),
                       params.lstm_b);
    Tensor in_gate = sigmoid(tape, slice_cols(tape, gates, 0, h));
    Tensor forget_gate = sigmoid(tape, slice_cols(tape, gates, h, h));
    Tensor out_gate = sigmoid(tape, slice_cols(tape, gates, 2 * h, h));
    Tensor candidate = tanh(tape, slice_cols(tape, gates, 3 * h, h));
    DecoderState next;
    next.c = add(tape, mul(tape, forget_gate, prev.c), mul(tape, in_gate, candidate));
    next.h = mul(tape, out_gate, tanh(tape, next.c));
    return next;
}

Tensor word_distribution(Tape& tape, int prev_token, const Tensor& h, const Tensor& context,
                         const CaptionerParams& params) {
    if (prev_token < 0 || prev_token >= params.dims.vocab) {
        throw InputError("word_distribution: token index " + std::to_string(prev_token) + " outside vocabulary of " +
                         std::to_string(params.dims.vocab));
    }
    Tensor emb = row_lookup(tape, params.embed, prev_token);
    Tensor hidden = add(tape, add(tape, matmul(tape, emb, params.out_we), matmul(tape, h, params.out_wh)),
                        matmul(tape, context, params.out_wz));
    return softmax(tape, matmul(tape, tanh(tape, hidden), params.out_w), 1);
}

StepOutput decoder_step(Tape& tape, const ImageInput& image, int prev_token, const DecoderState& prev,
                        const CaptionerParams& params) {
    if (prev_token < 0 || prev_token >= params.dims.vocab) {
        throw InputError("decoder_step: token index " + std::to_string(prev_token) + " out of range");
    }
    StepOutput out;
    Tensor p = project(tape, image.features, prev.h, params.attention);
    out.alpha = attend(tape, energy(tape, p, image.gaze, params.attention));
    out.context = context(tape, out.alpha, image.features);
    Tensor emb = row_lookup(tape, params.embed, prev_token);
    out.state = lstm_step(tape, concat(tape, {emb, out.context}), prev, params);
    out.probs = word_distribution(tape, prev_token, out.state.h, out.context, params);
    return out;
}

SequenceLoss sequence_loss(Tape& tape, const FeatureGrid& image, const GazeHistogram* gaze,
                           const std::vector<int>& reference, const CaptionerParams& params, Real lambda) {
    if (reference.empty()) throw InputError("sequence_loss: empty reference");
    if (reference.back() != Vocabulary::end) throw InputError("sequence_loss: reference must end with the end token");
    if (lambda < 0.0) throw InputError("sequence_loss: lambda must be non-negative");
    for (int y : reference) {
        if (y < 0 || y >= params.dims.vocab) throw InputError("sequence_loss: token " + std::to_string(y) + " out of range");
    }
    const ImageInput input = ImageInput::make(image, gaze, params.variant());
    DecoderState state = init_state(tape, input.features, params);
    int prev = Vocabulary::start;
    Tensor nll;
    Tensor alpha_sum;
    SequenceLoss out;
    for (int y : reference) {
        StepOutput step = decoder_step(tape, input, prev, state, params);
        Tensor neg_log_p = affine(tape, log(tape, select(tape, step.probs, 0, y)), -1.0, 0.0);
        nll = nll.defined() ? add(tape, nll, neg_log_p) : neg_log_p;
        alpha_sum = alpha_sum.defined() ? add(tape, alpha_sum, step.alpha) : step.alpha;
        out.trace.alpha.push_back(step.alpha.value().col(0));
        out.trace.context.push_back(step.context.value().row(0));
        state = step.state;
        prev = y;
    }
    Tensor deficit = affine(tape, alpha_sum, -1.0, 1.0);
    Tensor reg = sum_all(tape, mul(tape, deficit, deficit));
    out.nll = nll.item();
    out.reg = reg.item();
    out.loss = lambda > 0.0 ? add(tape, nll, affine(tape, reg, lambda, 0.0)) : nll;
    return out;
}

namespace {

struct Hypothesis {
    ScoredCaption caption;
    DecoderState state;
    int last = Vocabulary::start;
};

}  // namespace

std::vector<ScoredCaption> beam_search(const FeatureGrid& image, const GazeHistogram* gaze,
                                       const CaptionerParams& params, const DecodeOptions& options) {
    if (options.max_len < 1) throw InputError("decode: max_len must be >= 1");
    if (options.beam < 1) throw InputError("decode: beam width must be >= 1");
    Tape tape(Tape::Mode::inference);
    const ImageInput input = ImageInput::make(image, gaze, params.variant());

    std::vector<Hypothesis> live(1);
    live[0].state = init_state(tape, input.features, params);
    std::vector<ScoredCaption> finished;

    struct Candidate {
        Real score;
        std::size_t hyp;
        int token;
    };
    for (int t = 0; t < options.max_len && !live.empty(); ++t) {
        std::vector<StepOutput> steps;
        std::vector<Candidate> cands;
        for (std::size_t k = 0; k < live.size(); ++k) {
            steps.push_back(decoder_step(tape, input, live[k].last, live[k].state, params));
            const Matrix& probs = steps.back().probs.value();
            for (Index v = 0; v < probs.cols(); ++v) {
                cands.push_back({live[k].caption.total_log_prob + std::log(probs(0, v)), k, static_cast<int>(v)});
            }
        }
        // Highest score first; ties go to the earlier hypothesis, then the lower token id.
        std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
        const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(options.beam), cands.size());
        std::vector<Hypothesis> next;
        for (std::size_t c = 0; c < keep; ++c) {
            const Candidate& cand = cands[c];
            const StepOutput& step = steps[cand.hyp];
            Hypothesis h = live[cand.hyp];
            const Real lp = std::log(step.probs.value()(0, cand.token));
            h.caption.tokens.push_back(cand.token);
            h.caption.log_probs.push_back(lp);
            h.caption.total_log_prob = cand.score;
            h.caption.trace.alpha.push_back(step.alpha.value().col(0));
            h.caption.trace.context.push_back(step.context.value().row(0));
            h.state = step.state;
            h.last = cand.token;
            if (cand.token == Vocabulary::end) {
                finished.push_back(std::move(h.caption));
            } else {
                next.push_back(std::move(h));
            }
        }
        live = std::move(next);
    }
    for (auto& h : live) {
        h.caption.truncated = true;
        finished.push_back(std::move(h.caption));
    }
    std::stable_sort(finished.begin(), finished.end(), [](const ScoredCaption& a, const ScoredCaption& b) {
        return a.total_log_prob > b.total_log_prob;
    });
    return finished;
}

ScoredCaption decode(const FeatureGrid& image, const GazeHistogram* gaze, const CaptionerParams& params,
                     const DecodeOptions& options) {
    return beam_search(image, gaze, params, options).front();
}

// ---------------------------------------------------------------- training

Trainer::Trainer(CaptionerParams& params, const Vocabulary& vocab, TrainConfig config)
    : params_(params),
      vocab_(vocab),
      config_(config),
      params_set_(params.parameters()),
      adam_(make_adam_state(params_set_, AdamConfig{config.lr, 0.9, 0.999, 1e-8})),
      batch_rng_(config.seed ^ fnv1a("minibatch-order")) {
    if (config_.lambda < 0.0) throw InputError("train: lambda must be non-negative");
    if (config_.batch_size < 1) throw InputError("train: batch size must be >= 1");
    if (vocab_.size() != params_.dims.vocab) throw InputError("train: vocabulary size does not match the model");
}

Real Trainer::step(const std::vector<const TrainingExample*>& images, const std::vector<const Tokens*>& captions) {
    if (images.size() != captions.size() || images.empty()) throw InputError("train step: bad batch");
    params_set_.zero_grad();
    const Real scale = 1.0 / static_cast<Real>(images.size());
    Real total = 0.0;
    last_nll_ = 0.0;
    last_reg_ = 0.0;
    for (std::size_t k = 0; k < images.size(); ++k) {
        const TrainingExample& ex = *images[k];
        Tape tape;
        SequenceLoss sl = sequence_loss(tape, ex.features, ex.gaze ? &*ex.gaze : nullptr, vocab_.encode(*captions[k]),
                                        params_, config_.lambda);
        const Real v = sl.loss.item();
        if (!std::isfinite(v)) throw NumericError("non-finite loss on image " + ex.image_id);
        tape.backward(affine(tape, sl.loss, scale, 0.0));
        total += v;
        last_nll_ += sl.nll;
        last_reg_ += sl.reg;
    }
    params_set_.clip_grad_norm(config_.clip_norm);
    adam_step(params_set_, adam_);
    step_losses_.push_back(total * scale);
    return total * scale;
}

std::pair<Real, Real> Trainer::epoch(const std::vector<TrainingExample>& train, int epoch_index) {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t c = 0; c < train[i].captions.size(); ++c) order.emplace_back(i, c);
    }
    if (order.empty()) throw InputError("train: no training captions");
    std::shuffle(order.begin(), order.end(), batch_rng_);
    Real nll = 0.0;
    Real reg = 0.0;
    const auto bs = static_cast<std::size_t>(config_.batch_size);
    int batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += bs, ++batch_index) {
        std::vector<const TrainingExample*> imgs;
        std::vector<const Tokens*> caps;
        for (std::size_t k = b; k < std::min(order.size(), b + bs); ++k) {
            imgs.push_back(&train[order[k].first]);
            caps.push_back(&train[order[k].first].captions[order[k].second]);
        }
        try {
            step(imgs, caps);
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch_index) + " batch " + std::to_string(batch_index) + ": " +
                               e.what());
        }
        nll += last_nll_;
        reg += last_reg_;
    }
    const auto n = static_cast<Real>(order.size());
    return {nll / n, reg / n};
}

std::vector<ScoredCaption> caption_all(const std::vector<TrainingExample>& examples, const CaptionerParams& params,
                                       const DecodeOptions& options) {
    std::vector<ScoredCaption> out(examples.size());
    parallel_for(examples.size(), [&](std::size_t i) {
        const auto& ex = examples[i];
        out[i] = decode(ex.features, ex.gaze ? &*ex.gaze : nullptr, params, options);
    });
    return out;
}

Real validation_bleu1(const std::vector<TrainingExample>& examples, const CaptionerParams& params,
                      const Vocabulary& vocab, const DecodeOptions& options) {
    const auto caps = caption_all(examples, params, options);
    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        pairs.push_back({examples[i].image_id, vocab.decode(caps[i].tokens), examples[i].captions});
    }
    return bleu(pairs, 1).front();
}

TrainResult train(CaptionerParams& params, const Vocabulary& vocab, const std::vector<TrainingExample>& train_set,
                  const std::vector<TrainingExample>& val_set, const TrainConfig& config, const EpochCallback& on_epoch) {
    if (train_set.empty() || val_set.empty()) throw InputError("train: training and validation sets must be non-empty");
    Trainer trainer(params, vocab, config);
    TrainResult result;
    result.best_values = snapshot(trainer.parameters());
    int since_best = 0;
    const DecodeOptions greedy{1, config.max_len};
    for (int e = 1; e <= config.max_epochs; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto [nll, reg] = trainer.epoch(train_set, e);
        EpochLog row;
        row.epoch = e;
        row.train_nll = nll;
        row.train_reg = reg;
        row.val_bleu1 = validation_bleu1(val_set, params, vocab, greedy);
        row.wall_seconds = std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(row);
        if (on_epoch) on_epoch(row, params);
        if (row.val_bleu1 > result.best_val_bleu1) {
            result.best_val_bleu1 = row.val_bleu1;
            result.best_epoch = e;
            result.best_values = snapshot(trainer.parameters());
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    restore(trainer.parameters(), result.best_values);
    return result;
}

}  // namespace gazecap
