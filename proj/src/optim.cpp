#include "gazecap/optim.hpp"

#include <cmath>
#include <random>

namespace gazecap {

void ParameterSet::add(std::string name, Tensor t) {
    if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
    items_.push_back({std::move(name), std::move(t)});
}

const Tensor* ParameterSet::find(const std::string& name) const {
    for (const auto& p : items_) {
        if (p.name == name) return &p.tensor;
    }
    return nullptr;
}

Tensor& ParameterSet::at(const std::string& name) {
    for (auto& p : items_) {
        if (p.name == name) return p.tensor;
    }
    throw std::out_of_range("no parameter named " + name);
}

void ParameterSet::zero_grad() {
    for (auto& p : items_) p.tensor.zero_grad();
}

Real ParameterSet::grad_norm() const {
    Real sq = 0.0;
    for (const auto& p : items_) sq += p.tensor.grad().squaredNorm();
    return std::sqrt(sq);
}

Real ParameterSet::clip_grad_norm(Real max_norm) {
    const Real norm = grad_norm();
    if (max_norm > 0.0 && norm > max_norm) {
        const Real s = max_norm / norm;
        for (auto& p : items_) p.tensor.mutable_grad() *= s;
    }
    return norm;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Matrix glorot_uniform(Index rows, Index cols, std::uint64_t seed, const std::string& stream) {
    std::mt19937_64 rng(seed ^ fnv1a(stream));
    const Real r = std::sqrt(6.0 / static_cast<Real>(rows + cols));
    std::uniform_real_distribution<Real> u(-r, r);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

AdamState make_adam_state(const ParameterSet& params, AdamConfig config) {
    AdamState s;
    s.config = config;
    for (const auto& p : params.items()) {
        s.first_moment.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
        s.second_moment.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
    }
    return s;
}

void adam_step(ParameterSet& params, AdamState& state) {
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: optimizer state has " + std::to_string(state.first_moment.size()) +
                         " buffers for " + std::to_string(params.size()) + " parameters");
    }
    for (const auto& p : params.items()) {
        if (!p.tensor.grad().allFinite()) throw NumericError("adam_step: non-finite gradient for " + p.name);
    }
    const AdamConfig& c = state.config;
    ++state.step;
    const Real bc1 = 1.0 - std::pow(c.beta1, static_cast<Real>(state.step));
    const Real bc2 = 1.0 - std::pow(c.beta2, static_cast<Real>(state.step));
    std::size_t k = 0;
    for (const auto& item : params.items()) {
        Tensor p = item.tensor;
        const Matrix& g = p.grad();
        Matrix& m = state.first_moment[k];
        Matrix& v = state.second_moment[k];
        if (m.rows() != g.rows() || m.cols() != g.cols()) {
            throw ShapeError("adam_step: moment buffer shape mismatch for " + item.name);
        }
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
        p.mutable_value().array() -=
            c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
        ++k;
    }
}

}  // namespace gazecap
