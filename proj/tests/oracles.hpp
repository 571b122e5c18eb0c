#ifndef GAZECAP_TESTS_ORACLES_HPP
#define GAZECAP_TESTS_ORACLES_HPP

// Independent reference implementations used by the unit tests and the
// acceptance runner. Deliberately naive: linear scans, recursion, plain loops.

#include "gazecap/metrics.hpp"
#include "gazecap/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using gazecap::Index;
using gazecap::Matrix;
using gazecap::Real;
using gazecap::Tokens;

// ---------------------------------------------------------------- gradients

/// Central differences of `f` with respect to every entry of `x`.
inline Matrix finite_difference(const std::function<Real()>& f, Matrix& x, Real eps = 1e-6) {
    Matrix g(x.rows(), x.cols());
    for (Index i = 0; i < x.size(); ++i) {
        const Real keep = x.data()[i];
        x.data()[i] = keep + eps;
        const Real up = f();
        x.data()[i] = keep - eps;
        const Real down = f();
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

/// Norm below which a gradient counts as identically zero (e.g. a softmax
/// shift); both sides must fall below it to agree.
inline constexpr Real kZeroGradient = 1e-8;

/// ||a - b|| / max(||a||, ||b||); 0 when both are below kZeroGradient.
inline Real relative_error(const Matrix& a, const Matrix& b) {
    const Real scale = std::max(a.norm(), b.norm());
    if (scale < kZeroGradient) return 0.0;
    return (a - b).norm() / scale;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            Real s = 0.0;
            for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

inline std::vector<Real> softmax(const std::vector<Real>& e) {
    Real m = e[0];
    for (Real v : e) m = std::max(m, v);
    std::vector<Real> out(e.size());
    Real z = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) z += out[i] = std::exp(e[i] - m);
    for (Real& v : out) v /= z;
    return out;
}

// ---------------------------------------------------------------- metrics

inline std::vector<Tokens> all_ngrams(const Tokens& t, int n) {
    std::vector<Tokens> out;
    for (int i = 0; i + n <= static_cast<int>(t.size()); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
    return out;
}

inline int count_of(const std::vector<Tokens>& grams, const Tokens& g) {
    return static_cast<int>(std::count(grams.begin(), grams.end(), g));
}

/// Corpus BLEU-1..max_n, unsmoothed, closest reference length (ties shorter).
inline std::vector<Real> bleu(const std::vector<gazecap::EvalPair>& pairs, int max_n = 4) {
    std::vector<Real> hit(static_cast<std::size_t>(max_n), 0.0);
    std::vector<Real> tot(static_cast<std::size_t>(max_n), 0.0);
    Real c = 0.0;
    Real r = 0.0;
    for (const auto& p : pairs) {
        c += static_cast<Real>(p.candidate.size());
        int best = -1;
        for (const auto& ref : p.references) {
            const int len = static_cast<int>(ref.size());
            const int cl = static_cast<int>(p.candidate.size());
            if (best < 0 || std::abs(len - cl) < std::abs(best - cl) ||
                (std::abs(len - cl) == std::abs(best - cl) && len < best)) {
                best = len;
            }
        }
        r += best;
        for (int n = 1; n <= max_n; ++n) {
            const auto cg = all_ngrams(p.candidate, n);
            tot[static_cast<std::size_t>(n - 1)] += static_cast<Real>(cg.size());
            std::vector<Tokens> done;
            for (const auto& g : cg) {
                if (count_of(done, g) > 0) continue;
                done.push_back(g);
                int max_ref = 0;
                for (const auto& ref : p.references) max_ref = std::max(max_ref, count_of(all_ngrams(ref, n), g));
                hit[static_cast<std::size_t>(n - 1)] += std::min(count_of(cg, g), max_ref);
            }
        }
    }
    const Real bp = c == 0.0 ? 0.0 : (c < r ? std::exp(1.0 - r / c) : 1.0);
    std::vector<Real> out;
    Real prod = 1.0;
    for (int n = 1; n <= max_n; ++n) {
        const Real t = tot[static_cast<std::size_t>(n - 1)];
        prod *= t > 0.0 ? hit[static_cast<std::size_t>(n - 1)] / t : 0.0;
        out.push_back(bp * std::pow(prod, 1.0 / n));
    }
    return out;
}

inline int lcs(const Tokens& a, const Tokens& b, std::size_t i, std::size_t j, std::map<std::pair<std::size_t, std::size_t>, int>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int v = a[i] == b[j] ? 1 + lcs(a, b, i + 1, j + 1, memo)
                               : std::max(lcs(a, b, i + 1, j, memo), lcs(a, b, i, j + 1, memo));
    return memo[key] = v;
}

inline Real rouge_l(const std::vector<gazecap::EvalPair>& pairs, Real beta = 1.2) {
    Real sum = 0.0;
    for (const auto& p : pairs) {
        Real best = 0.0;
        for (const auto& ref : p.references) {
            std::map<std::pair<std::size_t, std::size_t>, int> memo;
            const Real l = lcs(p.candidate, ref, 0, 0, memo);
            if (l == 0.0) continue;
            const Real prec = l / static_cast<Real>(p.candidate.size());
            const Real rec = l / static_cast<Real>(ref.size());
            best = std::max(best, (1 + beta * beta) * prec * rec / (rec + beta * beta * prec));
        }
        sum += best;
    }
    return sum / static_cast<Real>(pairs.size());
}

/// Plain CIDEr: tf-idf cosine per order, idf = log(N / df) over reference
/// sets, averaged over references and orders, times 10.
inline Real cider(const std::vector<gazecap::EvalPair>& pairs, int max_n = 4) {
    const Real big_n = static_cast<Real>(pairs.size());
    auto df = [&](const Tokens& g, int n) {
        int d = 0;
        for (const auto& p : pairs) {
            bool any = false;
            for (const auto& ref : p.references) any = any || count_of(all_ngrams(ref, n), g) > 0;
            d += any ? 1 : 0;
        }
        return std::max(1, d);
    };
    auto vec = [&](const Tokens& t, int n) {
        std::vector<std::pair<Tokens, Real>> v;
        const auto grams = all_ngrams(t, n);
        for (const auto& g : grams) {
            bool seen = false;
            for (const auto& e : v) seen = seen || e.first == g;
            if (!seen) v.emplace_back(g, count_of(grams, g) * std::log(big_n / df(g, n)));
        }
        return v;
    };
    auto dot = [](const std::vector<std::pair<Tokens, Real>>& a, const std::vector<std::pair<Tokens, Real>>& b) {
        Real s = 0.0;
        for (const auto& x : a) {
            for (const auto& y : b) {
                if (x.first == y.first) s += x.second * y.second;
            }
        }
        return s;
    };
    Real total = 0.0;
    for (const auto& p : pairs) {
        Real score = 0.0;
        for (int n = 1; n <= max_n; ++n) {
            const auto cv = vec(p.candidate, n);
            Real acc = 0.0;
            for (const auto& ref : p.references) {
                const auto rv = vec(ref, n);
                const Real den = std::sqrt(dot(cv, cv)) * std::sqrt(dot(rv, rv));
                if (den > 0.0) acc += dot(cv, rv) / den;
            }
            score += acc / static_cast<Real>(p.references.size());
        }
        total += 10.0 * score / max_n;
    }
    return total / big_n;
}

/// 20 captions: five images, each with one candidate and three references,
/// drawn from a small vocabulary.
inline std::vector<gazecap::EvalPair> metric_fixture() {
    const std::vector<std::string> words = {"a", "the", "dog", "cat", "red", "ball", "on", "grass", "runs"};
    std::mt19937_64 rng(20240611);
    auto sentence = [&]() {
        Tokens t;
        const int len = 3 + static_cast<int>(rng() % 7);
        for (int i = 0; i < len; ++i) t.push_back(words[rng() % words.size()]);
        return t;
    };
    std::vector<gazecap::EvalPair> pairs;
    for (int i = 0; i < 5; ++i) {
        gazecap::EvalPair p;
        p.image_id = "img" + std::to_string(i);
        for (int r = 0; r < 3; ++r) p.references.push_back(sentence());
        // Candidates partly copy a reference so higher orders match too.
        p.candidate = sentence();
        const Tokens& src = p.references[static_cast<std::size_t>(i % 3)];
        p.candidate.insert(p.candidate.end(), src.begin(), src.begin() + std::min<std::size_t>(src.size(), 4));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace oracle

#endif  // GAZECAP_TESTS_ORACLES_HPP
