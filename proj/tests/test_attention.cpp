#include "grad_check.hpp"

#include "gazecap/attention.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gazecap;

namespace {

constexpr Index L = 9, D = 6, H = 5, P = 4;

Matrix random_matrix(Index r, Index c, std::uint64_t seed, Real lo = -1.0, Real hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> u(lo, hi);
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

struct Fixture {
    Tensor a = Tensor::constant(random_matrix(L, D, 1));
    Tensor h = Tensor::constant(random_matrix(1, H, 2));
    Tensor g = Tensor::constant(random_matrix(L, 1, 3, 0.0, 1.0));
};

AttentionParams params(AttentionVariant v, std::uint64_t seed = 5) {
    AttentionParams p = AttentionParams::init(v, {D, H, P}, seed);
    if (v != AttentionVariant::machine) {
        p.w_neg.mutable_value() = random_matrix(P, 1, seed + 100);  // distinct from w_pos
    }
    p.c_att.mutable_value()(0, 0) = 0.3;
    return p;
}

// Scalar-loop projection p_i = tanh(a_i U_a + h U_h + b).
Matrix project_loops(const Matrix& a, const Matrix& h, const AttentionParams& pr) {
    Matrix out(a.rows(), P);
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < P; ++j) {
            Real s = pr.b_p.value()(0, j);
            for (Index k = 0; k < D; ++k) s += a(i, k) * pr.u_a.value()(k, j);
            for (Index k = 0; k < H; ++k) s += h(0, k) * pr.u_h.value()(k, j);
            out(i, j) = std::tanh(s);
        }
    }
    return out;
}

Real dot_col(const Matrix& p, Index i, const Matrix& w) {
    Real s = 0.0;
    for (Index j = 0; j < p.cols(); ++j) s += p(i, j) * w(j, 0);
    return s;
}

}  // namespace

TEST(Attention, ProjectionAndEnergiesMatchScalarLoops) {
    Fixture f;
    for (auto v : {AttentionVariant::machine, AttentionVariant::gaze_only, AttentionVariant::split}) {
        const AttentionParams pr = params(v);
        Tape t;
        Tensor p = project(t, f.a, f.h, pr);
        const Matrix want_p = project_loops(f.a.value(), f.h.value(), pr);
        EXPECT_LT((p.value() - want_p).cwiseAbs().maxCoeff(), 1e-14);
        const Matrix e = energy(t, p, f.g, pr).value();
        const Real c = pr.c_att.value()(0, 0);
        for (Index i = 0; i < L; ++i) {
            const Real gi = f.g.value()(i, 0);
            Real want = 0.0;
            switch (v) {
                case AttentionVariant::machine: want = dot_col(want_p, i, pr.w_att.value()) + c; break;
                case AttentionVariant::gaze_only: want = gi * dot_col(want_p, i, pr.w_pos.value()) + c; break;
                case AttentionVariant::split:
                    want = gi * dot_col(want_p, i, pr.w_pos.value()) + (1 - gi) * dot_col(want_p, i, pr.w_neg.value()) + c;
                    break;
            }
            EXPECT_NEAR(e(i, 0), want, 1e-14) << to_string(v) << " region " << i;
        }
    }
}

TEST(Attention, SplitGateLimitsAndTiedWeightsCollapseToMachine) {
    Fixture f;
    AttentionParams split = params(AttentionVariant::split);
    AttentionParams machine = AttentionParams::init(AttentionVariant::machine, {D, H, P}, 5);
    machine.c_att.mutable_value() = split.c_att.value();
    Tape t;
    Tensor p = project(t, f.a, f.h, split);

    machine.w_att.mutable_value() = split.w_pos.value();
    EXPECT_LT((energy_split(t, p, Tensor::constant(Matrix::Ones(L, 1)), split).value() -
               energy_machine(t, p, machine).value()).cwiseAbs().maxCoeff(), 1e-15);
    machine.w_att.mutable_value() = split.w_neg.value();
    EXPECT_LT((energy_split(t, p, Tensor::constant(Matrix::Zero(L, 1)), split).value() -
               energy_machine(t, p, machine).value()).cwiseAbs().maxCoeff(), 1e-15);

    split.w_neg.mutable_value() = split.w_pos.value();
    machine.w_att.mutable_value() = split.w_pos.value();
    EXPECT_LT((energy_split(t, p, f.g, split).value() - energy_machine(t, p, machine).value()).cwiseAbs().maxCoeff(),
              1e-14);
}

TEST(Attention, GazeOnlyWithClosedGateIsUniform) {
    Fixture f;
    const AttentionParams pr = params(AttentionVariant::gaze_only);
    Tape t;
    const Matrix alpha = attend(t, energy(t, project(t, f.a, f.h, pr), Tensor::constant(Matrix::Zero(L, 1)), pr)).value();
    for (Index i = 0; i < L; ++i) EXPECT_NEAR(alpha(i, 0), 1.0 / L, 1e-15);
}

TEST(Attention, GateMonotonicity) {
    Fixture f;
    const AttentionParams pr = params(AttentionVariant::split);
    Tape t;
    Tensor p = project(t, f.a, f.h, pr);
    Matrix g = Matrix::Constant(L, 1, 0.2);
    const Matrix e0 = energy_split(t, p, Tensor::constant(g), pr).value();
    g.array() += 0.3;
    const Matrix e1 = energy_split(t, p, Tensor::constant(g), pr).value();
    for (Index i = 0; i < L; ++i) {
        const Real diff = dot_col(p.value(), i, pr.w_pos.value()) - dot_col(p.value(), i, pr.w_neg.value());
        if (diff > 0) {
            EXPECT_GT(e1(i, 0), e0(i, 0));
        } else if (diff < 0) {
            EXPECT_LT(e1(i, 0), e0(i, 0));
        }
    }
}

TEST(Attention, WeightsNormalizeAndContextIsWeightedSum) {
    Fixture f;
    const AttentionParams pr = params(AttentionVariant::split);
    Tape t;
    Tensor alpha = attend(t, energy(t, project(t, f.a, f.h, pr), f.g, pr));
    EXPECT_NEAR(alpha.value().sum(), 1.0, 1e-15);
    EXPECT_GE(alpha.value().minCoeff(), 0.0);
    const Matrix z = context(t, alpha, f.a).value();
    for (Index k = 0; k < D; ++k) {
        Real s = 0.0;
        for (Index i = 0; i < L; ++i) s += alpha.value()(i, 0) * f.a.value()(i, k);
        EXPECT_NEAR(z(0, k), s, 1e-15);
    }
}

TEST(Attention, GradientsMatchFiniteDifferences) {
    Fixture f;
    for (auto v : {AttentionVariant::machine, AttentionVariant::gaze_only, AttentionVariant::split}) {
        const AttentionParams pr = params(v);
        ParameterSet set;
        pr.register_parameters(set);
        std::vector<std::pair<std::string, Tensor>> tensors;
        for (const auto& item : set.items()) tensors.emplace_back(item.name, item.tensor);
        Tensor h = Tensor::parameter(f.h.value());
        tensors.emplace_back("h", h);
        const Matrix w = random_matrix(1, D, 77);
        const auto rep = oracle::check_gradients(
            [&](Tape& t) {
                Tensor z = context(t, attend(t, energy(t, project(t, f.a, h, pr), f.g, pr)), f.a);
                return sum_all(t, mul(t, z, Tensor::constant(w)));
            },
            tensors);
        for (const auto& [name, err] : rep.per_tensor) EXPECT_LT(err, 1e-6) << to_string(v) << " " << name;
    }
}

TEST(Attention, RegistersOnlyActiveWeights) {
    auto names = [](const AttentionParams& p) {
        ParameterSet s;
        p.register_parameters(s);
        std::vector<std::string> out;
        for (const auto& i : s.items()) out.push_back(i.name);
        return out;
    };
    const auto m = names(AttentionParams::init(AttentionVariant::machine, {D, H, P}, 1));
    const auto go = names(AttentionParams::init(AttentionVariant::gaze_only, {D, H, P}, 1));
    const auto sp = names(AttentionParams::init(AttentionVariant::split, {D, H, P}, 1));
    const auto tied = names(AttentionParams::init(AttentionVariant::split, {D, H, P}, 1, true));
    auto has = [](const std::vector<std::string>& v, const std::string& n) {
        return std::find(v.begin(), v.end(), n) != v.end();
    };
    EXPECT_TRUE(has(m, "attention.w_att"));
    EXPECT_FALSE(has(m, "attention.w_pos"));
    EXPECT_TRUE(has(go, "attention.w_pos"));
    EXPECT_FALSE(has(go, "attention.w_neg"));
    EXPECT_TRUE(has(sp, "attention.w_neg"));
    EXPECT_FALSE(has(tied, "attention.w_neg"));
    EXPECT_TRUE(AttentionParams::init(AttentionVariant::split, {D, H, P}, 1, true).gate_weights_tied());
}

TEST(Attention, RejectsBadGateValuesAndMissingGaze) {
    Fixture f;
    const AttentionParams pr = params(AttentionVariant::split);
    Tape t;
    Tensor p = project(t, f.a, f.h, pr);
    Matrix bad = f.g.value();
    bad(2, 0) = 1.5;
    EXPECT_THROW(energy_split(t, p, Tensor::constant(bad), pr), InputError);
    EXPECT_THROW(energy_split(t, p, Tensor::constant(Matrix::Zero(L - 1, 1)), pr), ShapeError);
    EXPECT_THROW(energy(t, p, Tensor(), pr), InputError);
    EXPECT_THROW(parse_attention_variant("hybrid"), InputError);
    EXPECT_EQ(parse_attention_variant("gaze-only"), AttentionVariant::gaze_only);
}
