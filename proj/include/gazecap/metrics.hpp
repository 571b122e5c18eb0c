#ifndef GAZECAP_METRICS_HPP
#define GAZECAP_METRICS_HPP

#include "gazecap/text.hpp"
#include "gazecap/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace gazecap {

/// One candidate caption with its references, already tokenized.
struct EvalPair {
    std::string image_id;
    Tokens candidate;
    std::vector<Tokens> references;
};

enum class BleuSmoothing {
    none,     // zero matches at any order => score 0
    epsilon,  // (matches + 1e-15) / (total + 1e-9), as in the COCO toolkit
};

/// Corpus BLEU-1..max_n (index 0 is BLEU-1). Clipped n-gram precision,
/// uniform weights, brevity penalty against the closest reference length
/// (ties resolved toward the shorter reference).
std::vector<Real> bleu(const std::vector<EvalPair>& pairs, int max_n = 4,
                       BleuSmoothing smoothing = BleuSmoothing::none);

/// Longest common subsequence length.
std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// Mean over pairs of max over references of the LCS F-measure
/// (1 + beta^2) P R / (R + beta^2 P).
Real rouge_l(const std::vector<EvalPair>& pairs, Real beta = 1.2);

/// Consensus score: per order n, cosine between tf-idf n-gram vectors of the
/// candidate and each reference (idf from reference document frequencies over
/// images), averaged over references and orders, times 10; mean over pairs.
Real cider(const std::vector<EvalPair>& pairs, int max_n = 4);

struct MetricRow {
    std::vector<Real> bleu;  // BLEU-1..4
    Real rouge_l = 0.0;
    Real cider = 0.0;
};

MetricRow evaluate_all(const std::vector<EvalPair>& pairs, BleuSmoothing smoothing = BleuSmoothing::none);

struct WordPRRow {
    std::string word;
    Real precision = 0.0;
    Real recall = 0.0;
    Real f_score = 0.0;
    int support = 0;             // number of reference captions containing the word
    bool precision_defined = true;  // false when the word was never predicted
};

/// Weighted per-word precision/recall. Words are lemmatized on both sides.
/// An image is positive for a word when some reference contains it, weighted
/// by the number of such references; negatives weigh 1. Only words whose
/// support exceeds `min_freq` are reported, sorted by word.
std::vector<WordPRRow> word_pr(const std::vector<EvalPair>& pairs, int min_freq = 10);

struct WordDelta {
    std::vector<std::string> improved;
    std::vector<std::string> degraded;
};

/// Words whose F-score moved by more than `threshold` from `a` to `b`.
/// Words missing from either side are ignored.
WordDelta word_pr_delta(const std::vector<WordPRRow>& a, const std::vector<WordPRRow>& b, Real threshold = 0.05);

}  // namespace gazecap

#endif  // GAZECAP_METRICS_HPP
