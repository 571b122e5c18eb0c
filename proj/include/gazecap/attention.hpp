#ifndef GAZECAP_ATTENTION_HPP
#define GAZECAP_ATTENTION_HPP

#include "gazecap/grid.hpp"
#include "gazecap/optim.hpp"
#include "gazecap/tensor.hpp"

#include <optional>
#include <string>

namespace gazecap {

/// Which energy function drives the soft attention.
///   machine:   e_i = w_att . p_i + c
///   gaze_only: e_i = g_i (w_pos . p_i) + c
///   split:     e_i = g_i (w_pos . p_i) + (1 - g_i)(w_neg . p_i) + c
enum class AttentionVariant { machine, gaze_only, split };

std::string to_string(AttentionVariant v);
AttentionVariant parse_attention_variant(const std::string& s);
bool uses_gaze(AttentionVariant v);

struct AttentionDims {
    Index feature_dim = 0;     // D
    Index hidden_dim = 0;      // H
    Index projection_dim = 0;  // P
};

/// Projection and energy weights. Only the weights of the active variant
/// are registered for training; w_neg may alias w_pos (tied gate weights).
struct AttentionParams {
    AttentionVariant variant = AttentionVariant::machine;
    Tensor u_a;    // D x P
    Tensor u_h;    // H x P
    Tensor b_p;    // 1 x P
    Tensor w_att;  // P x 1
    Tensor w_pos;  // P x 1
    Tensor w_neg;  // P x 1
    Tensor c_att;  // 1 x 1

    AttentionDims dims() const;

    /// Glorot init; every energy vector starts from the "attention.w_att"
    /// stream, so all variants begin with identical energy weights.
    static AttentionParams init(AttentionVariant variant, const AttentionDims& dims, std::uint64_t seed,
                                bool tie_gate_weights = false);
    static AttentionParams zeros(AttentionVariant variant, const AttentionDims& dims);

    bool gate_weights_tied() const;
    /// Adds the trainable tensors of the active variant under "attention.*".
    void register_parameters(ParameterSet& set) const;
};

/// p = tanh(a U_a + h U_h + b_p) for all L regions at once; result L x P.
Tensor project(Tape& tape, const Tensor& features, const Tensor& h_prev, const AttentionParams& params);

/// e = p w_att + c_att; result L x 1.
Tensor energy_machine(Tape& tape, const Tensor& p, const AttentionParams& params);

/// Gaze-gated energies for the split and gaze_only variants; `gaze` is L x 1
/// with entries in [0,1].
Tensor energy_split(Tape& tape, const Tensor& p, const Tensor& gaze, const AttentionParams& params);

/// Dispatches on params.variant. `gaze` must be defined for gaze variants.
Tensor energy(Tape& tape, const Tensor& p, const Tensor& gaze, const AttentionParams& params);

/// Softmax over regions; result L x 1.
Tensor attend(Tape& tape, const Tensor& e);

/// z = sum_i alpha_i a_i; result 1 x D.
Tensor context(Tape& tape, const Tensor& alpha, const Tensor& features);

/// Throws InputError if any gaze entry is outside [0,1] or not finite.
void check_gate_values(const Matrix& gaze);

}  // namespace gazecap

#endif  // GAZECAP_ATTENTION_HPP
