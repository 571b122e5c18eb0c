#include "gazecap/attention.hpp"

#include <cmath>

namespace gazecap {

void FeatureGrid::validate() const {
    if (grid_h <= 0 || grid_w <= 0) throw InputError("feature grid: non-positive grid dims");
    if (a.rows() != static_cast<Index>(grid_h) * grid_w) {
        throw InputError("feature grid: " + std::to_string(a.rows()) + " regions for a " + std::to_string(grid_h) +
                         "x" + std::to_string(grid_w) + " grid");
    }
    if (!a.allFinite()) throw InputError("feature grid: non-finite value");
}

void GazeHistogram::validate() const {
    if (g.size() != static_cast<Index>(grid_h) * grid_w) {
        throw InputError("gaze histogram: " + std::to_string(g.size()) + " cells for a " + std::to_string(grid_h) +
                         "x" + std::to_string(grid_w) + " grid");
    }
    check_gate_values(g);
}

std::string to_string(AttentionVariant v) {
    switch (v) {
        case AttentionVariant::machine: return "machine";
        case AttentionVariant::gaze_only: return "gaze_only";
        case AttentionVariant::split: return "split";
    }
    return "?";
}

AttentionVariant parse_attention_variant(const std::string& s) {
    if (s == "machine") return AttentionVariant::machine;
    if (s == "gaze_only" || s == "gaze-only") return AttentionVariant::gaze_only;
    if (s == "split") return AttentionVariant::split;
    throw InputError("unknown attention variant '" + s + "'");
}

bool uses_gaze(AttentionVariant v) { return v != AttentionVariant::machine; }

AttentionDims AttentionParams::dims() const { return {u_a.rows(), u_h.rows(), u_a.cols()}; }

AttentionParams AttentionParams::init(AttentionVariant variant, const AttentionDims& d, std::uint64_t seed,
                                      bool tie_gate_weights) {
    if (d.projection_dim <= 0) throw InputError("attention: projection dim must be positive");
    AttentionParams p;
    p.variant = variant;
    p.u_a = Tensor::parameter(glorot_uniform(d.feature_dim, d.projection_dim, seed, "attention.u_a"));
    p.u_h = Tensor::parameter(glorot_uniform(d.hidden_dim, d.projection_dim, seed, "attention.u_h"));
    p.b_p = Tensor::parameter(Matrix::Zero(1, d.projection_dim));
    const Matrix w = glorot_uniform(d.projection_dim, 1, seed, "attention.w_att");
    p.w_att = Tensor::parameter(w);
    p.w_pos = Tensor::parameter(w);
    p.w_neg = tie_gate_weights ? p.w_pos : Tensor::parameter(w);
    p.c_att = Tensor::parameter(Matrix::Zero(1, 1));
    return p;
}

AttentionParams AttentionParams::zeros(AttentionVariant variant, const AttentionDims& d) {
    AttentionParams p;
    p.variant = variant;
    p.u_a = Tensor::parameter(Matrix::Zero(d.feature_dim, d.projection_dim));
    p.u_h = Tensor::parameter(Matrix::Zero(d.hidden_dim, d.projection_dim));
    p.b_p = Tensor::parameter(Matrix::Zero(1, d.projection_dim));
    p.w_att = Tensor::parameter(Matrix::Zero(d.projection_dim, 1));
    p.w_pos = Tensor::parameter(Matrix::Zero(d.projection_dim, 1));
    p.w_neg = Tensor::parameter(Matrix::Zero(d.projection_dim, 1));
    p.c_att = Tensor::parameter(Matrix::Zero(1, 1));
    return p;
}

bool AttentionParams::gate_weights_tied() const {
    return w_pos.defined() && w_neg.defined() && &w_pos.value() == &w_neg.value();
}

void AttentionParams::register_parameters(ParameterSet& set) const {
    set.add("attention.u_a", u_a);
    set.add("attention.u_h", u_h);
    set.add("attention.b_p", b_p);
    switch (variant) {
        case AttentionVariant::machine: set.add("attention.w_att", w_att); break;
        case AttentionVariant::gaze_only: set.add("attention.w_pos", w_pos); break;
        case AttentionVariant::split:
            set.add("attention.w_pos", w_pos);
            if (!gate_weights_tied()) set.add("attention.w_neg", w_neg);
            break;
    }
    set.add("attention.c_att", c_att);
}

Tensor project(Tape& tape, const Tensor& features, const Tensor& h_prev, const AttentionParams& params) {
    Tensor from_features = matmul(tape, features, params.u_a);
    Tensor from_state = add(tape, matmul(tape, h_prev, params.u_h), params.b_p);
    return tanh(tape, add(tape, from_features, from_state));
}

Tensor energy_machine(Tape& tape, const Tensor& p, const AttentionParams& params) {
    return add(tape, matmul(tape, p, params.w_att), params.c_att);
}

void check_gate_values(const Matrix& gaze) {
    for (Index i = 0; i < gaze.size(); ++i) {
        const Real v = gaze.data()[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InputError("gaze value " + std::to_string(v) + " at cell " + std::to_string(i) +
                             " is outside [0,1]");
        }
    }
}

Tensor energy_split(Tape& tape, const Tensor& p, const Tensor& gaze, const AttentionParams& params) {
    if (gaze.rows() != p.rows() || gaze.cols() != 1) {
        throw ShapeError("energy_split: gaze " + gaze.shape_string() + " does not match projections " +
                         p.shape_string());
    }
    check_gate_values(gaze.value());
    Tensor gated = mul(tape, matmul(tape, p, params.w_pos), gaze);
    if (params.variant == AttentionVariant::split) {
        Tensor closed = Tensor::constant((1.0 - gaze.value().array()).matrix());
        gated = add(tape, gated, mul(tape, matmul(tape, p, params.w_neg), closed));
    }
    return add(tape, gated, params.c_att);
}

Tensor energy(Tape& tape, const Tensor& p, const Tensor& gaze, const AttentionParams& params) {
    if (params.variant == AttentionVariant::machine) return energy_machine(tape, p, params);
    if (!gaze.defined()) throw InputError("attention variant " + to_string(params.variant) + " requires gaze");
    return energy_split(tape, p, gaze, params);
}

Tensor attend(Tape& tape, const Tensor& e) { return softmax(tape, e, 0); }

Tensor context(Tape& tape, const Tensor& alpha, const Tensor& features) {
    if (alpha.rows() != features.rows() || alpha.cols() != 1) {
        throw ShapeError("context: weights " + alpha.shape_string() + " vs features " + features.shape_string());
    }
    return matmul(tape, transpose(tape, alpha), features);
}

}  // namespace gazecap
