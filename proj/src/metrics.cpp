#include "gazecap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace gazecap {

namespace {

using NgramCounts = std::map<std::string, int>;

NgramCounts ngrams(const Tokens& tokens, int n) {
    NgramCounts out;
    const auto len = static_cast<int>(tokens.size());
    for (int i = 0; i + n <= len; ++i) {
        std::string key = tokens[static_cast<std::size_t>(i)];
        for (int k = 1; k < n; ++k) {
            key += '\x1f';
            key += tokens[static_cast<std::size_t>(i + k)];
        }
        ++out[key];
    }
    return out;
}

std::size_t closest_ref_length(std::size_t cand_len, const std::vector<Tokens>& refs) {
    std::size_t best = refs.front().size();
    for (const auto& r : refs) {
        const auto d = std::llabs(static_cast<long long>(r.size()) - static_cast<long long>(cand_len));
        const auto bd = std::llabs(static_cast<long long>(best) - static_cast<long long>(cand_len));
        if (d < bd || (d == bd && r.size() < best)) best = r.size();
    }
    return best;
}

}  // namespace

std::vector<Real> bleu(const std::vector<EvalPair>& pairs, int max_n, BleuSmoothing smoothing) {
    if (max_n < 1) throw InputError("bleu: max_n must be >= 1");
    std::vector<double> matched(static_cast<std::size_t>(max_n), 0.0);
    std::vector<double> total(static_cast<std::size_t>(max_n), 0.0);
    double cand_len = 0.0;
    double ref_len = 0.0;
    for (const auto& p : pairs) {
        if (p.references.empty()) throw InputError("bleu: image " + p.image_id + " has no references");
        cand_len += static_cast<double>(p.candidate.size());
        ref_len += static_cast<double>(closest_ref_length(p.candidate.size(), p.references));
        for (int n = 1; n <= max_n; ++n) {
            const NgramCounts cand = ngrams(p.candidate, n);
            NgramCounts max_ref;
            for (const auto& r : p.references) {
                for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
            }
            double clipped = 0.0;
            for (const auto& [g, c] : cand) {
                auto it = max_ref.find(g);
                if (it != max_ref.end()) clipped += std::min(c, it->second);
            }
            matched[static_cast<std::size_t>(n - 1)] += clipped;
            total[static_cast<std::size_t>(n - 1)] +=
                std::max(0.0, static_cast<double>(p.candidate.size()) - n + 1);
        }
    }
    double bp = 0.0;
    if (cand_len > 0.0) bp = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;

    std::vector<Real> scores(static_cast<std::size_t>(max_n), 0.0);
    double log_sum = 0.0;
    bool zero = false;
    for (int n = 1; n <= max_n; ++n) {
        const auto k = static_cast<std::size_t>(n - 1);
        double p = 0.0;
        if (smoothing == BleuSmoothing::epsilon) {
            p = (matched[k] + 1e-15) / (total[k] + 1e-9);
        } else if (total[k] > 0.0) {
            p = matched[k] / total[k];
        }
        if (p <= 0.0) zero = true;
        if (!zero) log_sum += std::log(p);
        scores[k] = zero ? 0.0 : bp * std::exp(log_sum / n);
    }
    return scores;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

Real rouge_l(const std::vector<EvalPair>& pairs, Real beta) {
    if (pairs.empty()) throw InputError("rouge_l: empty corpus");
    const Real b2 = beta * beta;
    Real sum = 0.0;
    for (const auto& p : pairs) {
        Real best = 0.0;
        for (const auto& r : p.references) {
            const auto lcs = static_cast<Real>(lcs_length(p.candidate, r));
            if (lcs == 0.0) continue;
            const Real prec = lcs / static_cast<Real>(p.candidate.size());
            const Real rec = lcs / static_cast<Real>(r.size());
            best = std::max(best, (1.0 + b2) * prec * rec / (rec + b2 * prec));
        }
        sum += best;
    }
    return sum / static_cast<Real>(pairs.size());
}

Real cider(const std::vector<EvalPair>& pairs, int max_n) {
    if (pairs.empty()) throw InputError("cider: empty corpus");
    const auto n_images = static_cast<Real>(pairs.size());
    Real total = 0.0;
    std::vector<Real> per_pair(pairs.size(), 0.0);
    for (int n = 1; n <= max_n; ++n) {
        std::map<std::string, int> df;
        std::vector<std::vector<NgramCounts>> ref_counts(pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            std::set<std::string> seen;
            for (const auto& r : pairs[i].references) {
                ref_counts[i].push_back(ngrams(r, n));
                for (const auto& [g, c] : ref_counts[i].back()) seen.insert(g);
            }
            for (const auto& g : seen) ++df[g];
        }
        auto idf = [&](const std::string& g) {
            auto it = df.find(g);
            const Real d = it == df.end() ? 1.0 : static_cast<Real>(it->second);
            return std::log(n_images / std::max(1.0, d));
        };
        auto weigh = [&](const NgramCounts& counts) {
            std::map<std::string, Real> v;
            for (const auto& [g, c] : counts) v[g] = c * idf(g);
            return v;
        };
        auto norm = [](const std::map<std::string, Real>& v) {
            Real s = 0.0;
            for (const auto& [g, x] : v) s += x * x;
            return std::sqrt(s);
        };
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto cand = weigh(ngrams(pairs[i].candidate, n));
            const Real cn = norm(cand);
            Real sim_sum = 0.0;
            for (const auto& rc : ref_counts[i]) {
                const auto ref = weigh(rc);
                const Real rn = norm(ref);
                if (cn == 0.0 || rn == 0.0) continue;
                Real dot = 0.0;
                for (const auto& [g, x] : cand) {
                    auto it = ref.find(g);
                    if (it != ref.end()) dot += x * it->second;
                }
                sim_sum += dot / (cn * rn);
            }
            if (!ref_counts[i].empty()) per_pair[i] += sim_sum / static_cast<Real>(ref_counts[i].size());
        }
    }
    for (Real s : per_pair) total += 10.0 * s / max_n;
    return total / n_images;
}

MetricRow evaluate_all(const std::vector<EvalPair>& pairs, BleuSmoothing smoothing) {
    MetricRow row;
    row.bleu = bleu(pairs, 4, smoothing);
    row.rouge_l = rouge_l(pairs);
    row.cider = cider(pairs);
    return row;
}

std::vector<WordPRRow> word_pr(const std::vector<EvalPair>& pairs, int min_freq) {
    // Per image: lemma sets of the candidate and of each reference.
    std::vector<std::set<std::string>> predicted(pairs.size());
    std::vector<std::map<std::string, int>> ref_hits(pairs.size());
    std::map<std::string, int> support;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (const auto& t : pairs[i].candidate) predicted[i].insert(lemmatize(t));
        for (const auto& r : pairs[i].references) {
            std::set<std::string> words;
            for (const auto& t : r) words.insert(lemmatize(t));
            for (const auto& w : words) {
                ++ref_hits[i][w];
                ++support[w];
            }
        }
    }
    std::vector<WordPRRow> rows;
    for (const auto& [word, count] : support) {
        if (count <= min_freq) continue;
        Real tp = 0.0;
        Real fp = 0.0;
        Real fn = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            auto it = ref_hits[i].find(word);
            const int weight = it == ref_hits[i].end() ? 0 : it->second;
            const bool pred = predicted[i].count(word) > 0;
            if (weight > 0) {
                (pred ? tp : fn) += weight;
            } else if (pred) {
                fp += 1.0;
            }
        }
        WordPRRow row;
        row.word = word;
        row.support = count;
        row.precision_defined = tp + fp > 0.0;
        row.precision = row.precision_defined ? tp / (tp + fp) : 0.0;
        row.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        const Real pr = row.precision + row.recall;
        row.f_score = pr > 0.0 ? 2.0 * row.precision * row.recall / pr : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

WordDelta word_pr_delta(const std::vector<WordPRRow>& a, const std::vector<WordPRRow>& b, Real threshold) {
    std::map<std::string, Real> fa;
    for (const auto& r : a) fa[r.word] = r.f_score;
    WordDelta out;
    for (const auto& r : b) {
        auto it = fa.find(r.word);
        if (it == fa.end()) continue;
        const Real d = r.f_score - it->second;
        if (d > threshold) out.improved.push_back(r.word);
        if (d < -threshold) out.degraded.push_back(r.word);
    }
    std::sort(out.improved.begin(), out.improved.end());
    std::sort(out.degraded.begin(), out.degraded.end());
    return out;
}

}  // namespace gazecap
