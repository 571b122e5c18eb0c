#ifndef GAZECAP_CAPTIONER_HPP
#define GAZECAP_CAPTIONER_HPP

#include "gazecap/attention.hpp"
#include "gazecap/grid.hpp"
#include "gazecap/optim.hpp"
#include "gazecap/text.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace gazecap {

struct CaptionerDims {
    Index vocab = 0;       // V
    Index embed = 0;       // E
    Index feature = 512;   // D
    Index hidden = 1400;   // H
    Index projection = 0;  // P; 0 means "same as D"
    Index output = 0;      // deep-output width; 0 means "same as E"

    CaptionerDims resolved() const;
};

/// All learned weights of the decoder. Row-vector convention: x (1xN) * W (NxM).
struct CaptionerParams {
    CaptionerDims dims;
    Tensor embed;      // V x E
    Tensor lstm_wx;    // (E + D) x 4H, gate blocks [input, forget, output, candidate]
    Tensor lstm_wh;    // H x 4H
    Tensor lstm_b;     // 1 x 4H
    Tensor init_h_w;   // D x H
    Tensor init_h_b;   // 1 x H
    Tensor init_c_w;   // D x H
    Tensor init_c_b;   // 1 x H
    Tensor out_we;     // E x M
    Tensor out_wh;     // H x M
    Tensor out_wz;     // D x M
    Tensor out_w;      // M x V
    AttentionParams attention;

    static CaptionerParams init(const CaptionerDims& dims, AttentionVariant variant, std::uint64_t seed,
                                bool tie_gate_weights = false);
    static CaptionerParams zeros(const CaptionerDims& dims, AttentionVariant variant, bool tie_gate_weights = false);

    AttentionVariant variant() const { return attention.variant; }
    /// Trainable tensors in a fixed order ("embed", "lstm.wx", ..., "attention.*").
    ParameterSet parameters() const;
};

std::vector<Matrix> snapshot(const ParameterSet& params);
void restore(ParameterSet& params, const std::vector<Matrix>& values);

/// Per-step attention weights (L x 1) and context vectors (1 x D).
struct AttentionTrace {
    std::vector<ColVector> alpha;
    std::vector<RowVector> context;
};

struct ScoredCaption {
    std::vector<int> tokens;  // includes the end token when the caption terminated
    std::vector<Real> log_probs;
    Real total_log_prob = 0.0;
    AttentionTrace trace;
    bool truncated = false;
};

struct DecoderState {
    Tensor h;
    Tensor c;
};

/// Inputs of one image as tape constants.
struct ImageInput {
    Tensor features;  // L x D
    Tensor gaze;      // L x 1, undefined for the machine variant

    static ImageInput make(const FeatureGrid& grid, const GazeHistogram* gaze, AttentionVariant variant);
};

/// h0 = tanh(mean(a) W_h + b_h), c0 likewise.
DecoderState init_state(Tape& tape, const Tensor& features, const CaptionerParams& params);

/// Standard LSTM cell on input x = [embedding, context].
DecoderState lstm_step(Tape& tape, const Tensor& x, const DecoderState& prev, const CaptionerParams& params);

/// softmax(tanh(E y_prev W_oE + h W_oh + z W_oz) W_out); result 1 x V.
Tensor word_distribution(Tape& tape, int prev_token, const Tensor& h, const Tensor& context,
                         const CaptionerParams& params);

struct StepOutput {
    Tensor alpha;
    Tensor context;
    DecoderState state;
    Tensor probs;
};

/// One decoder step: attend with h_{t-1}, update the LSTM, emit p(y_t).
StepOutput decoder_step(Tape& tape, const ImageInput& image, int prev_token, const DecoderState& prev,
                        const CaptionerParams& params);

struct SequenceLoss {
    Tensor loss;  // nll + lambda * reg
    Real nll = 0.0;
    Real reg = 0.0;
    AttentionTrace trace;
};

/// Teacher-forced negative log-likelihood plus the doubly stochastic penalty
/// lambda * sum_i (1 - sum_t alpha_{t,i})^2. `reference` must end with the
/// end token.
SequenceLoss sequence_loss(Tape& tape, const FeatureGrid& image, const GazeHistogram* gaze,
                           const std::vector<int>& reference, const CaptionerParams& params, Real lambda);

struct DecodeOptions {
    int beam = 1;  // 1: greedy
    int max_len = 20;
};

/// All finished hypotheses, best first (non-increasing total log-probability).
std::vector<ScoredCaption> beam_search(const FeatureGrid& image, const GazeHistogram* gaze,
                                       const CaptionerParams& params, const DecodeOptions& options);

ScoredCaption decode(const FeatureGrid& image, const GazeHistogram* gaze, const CaptionerParams& params,
                     const DecodeOptions& options);

// ---------------------------------------------------------------- training

struct TrainConfig {
    Real lr = 1e-3;
    int batch_size = 16;
    int max_epochs = 30;
    Real lambda = 1.0;
    Real clip_norm = 5.0;
    int patience = 5;
    std::uint64_t seed = 1;
    int max_len = 20;
};

struct TrainingExample {
    std::string image_id;
    FeatureGrid features;
    std::optional<GazeHistogram> gaze;
    std::vector<Tokens> captions;
};

struct EpochLog {
    int epoch = 0;
    Real train_nll = 0.0;  // mean per caption
    Real train_reg = 0.0;  // mean per caption
    Real val_bleu1 = 0.0;
    Real wall_seconds = 0.0;
};

/// Mini-batch Adam over (image, caption) pairs with teacher forcing.
class Trainer {
public:
    Trainer(CaptionerParams& params, const Vocabulary& vocab, TrainConfig config);

    /// One optimizer step over the given (example, caption) pairs. Returns the
    /// mean loss over the batch before the update.
    Real step(const std::vector<const TrainingExample*>& images, const std::vector<const Tokens*>& captions);

    /// Runs one shuffled pass; returns {mean nll, mean reg}.
    std::pair<Real, Real> epoch(const std::vector<TrainingExample>& train, int epoch_index);

    const std::vector<Real>& step_losses() const { return step_losses_; }
    const ParameterSet& parameters() const { return params_set_; }
    ParameterSet& parameters() { return params_set_; }

private:
    CaptionerParams& params_;
    const Vocabulary& vocab_;
    TrainConfig config_;
    ParameterSet params_set_;
    AdamState adam_;
    std::mt19937_64 batch_rng_;
    std::vector<Real> step_losses_;
    Real last_nll_ = 0.0;
    Real last_reg_ = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = 0;
    Real best_val_bleu1 = -1.0;
    std::vector<Matrix> best_values;  // restored into params on return
};

using EpochCallback = std::function<void(const EpochLog&, const CaptionerParams&)>;

/// Trains with early stopping on validation BLEU-1 of greedy decodes; the
/// best-scoring parameters are left in `params`.
TrainResult train(CaptionerParams& params, const Vocabulary& vocab, const std::vector<TrainingExample>& train_set,
                  const std::vector<TrainingExample>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Greedy (or beam) captions for every example, in input order; decoding may
/// fan out to worker threads.
std::vector<ScoredCaption> caption_all(const std::vector<TrainingExample>& examples, const CaptionerParams& params,
                                       const DecodeOptions& options);

/// Corpus BLEU-1 of decoded captions against each example's references.
Real validation_bleu1(const std::vector<TrainingExample>& examples, const CaptionerParams& params,
                      const Vocabulary& vocab, const DecodeOptions& options);

}  // namespace gazecap

#endif  // GAZECAP_CAPTIONER_HPP
