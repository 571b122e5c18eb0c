#ifndef GAZECAP_OPTIM_HPP
#define GAZECAP_OPTIM_HPP

#include "gazecap/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gazecap {

struct NamedParameter {
    std::string name;
    Tensor tensor;
};

/// Ordered list of trainable tensors. Order fixes checkpoint layout and the
/// Adam buffer layout.
class ParameterSet {
public:
    void add(std::string name, Tensor t);
    const std::vector<NamedParameter>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    const Tensor* find(const std::string& name) const;
    Tensor& at(const std::string& name);

    void zero_grad();
    Real grad_norm() const;
    /// Rescales all grads so their global L2 norm is at most `max_norm`.
    /// Returns the pre-clip norm. max_norm <= 0 disables clipping.
    Real clip_grad_norm(Real max_norm);

private:
    std::vector<NamedParameter> items_;
};

/// Glorot-uniform matrix, drawn from a stream keyed by (seed, stream name),
/// so the same name gets the same values regardless of what else is initialized.
Matrix glorot_uniform(Index rows, Index cols, std::uint64_t seed, const std::string& stream);

/// 64-bit FNV-1a; stable across platforms, used for RNG stream keys.
std::uint64_t fnv1a(const std::string& s);

struct AdamConfig {
    Real lr = 1e-3;
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::int64_t step = 0;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
};

AdamState make_adam_state(const ParameterSet& params, AdamConfig config);

/// One bias-corrected Adam update in place. Throws NumericError naming the
/// parameter if any gradient entry is not finite; no parameter is touched then.
void adam_step(ParameterSet& params, AdamState& state);

}  // namespace gazecap

#endif  // GAZECAP_OPTIM_HPP
