#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gqr/corpus.hpp"

namespace gqr {

/// Maximum-likelihood query model: probs[w] = count(w) / |tokens|.
std::map<std::string, double> query_lm(std::span<const std::string> tokens);

struct ScsResult {
    double value = 0.0;
    int query_terms = 0; // distinct terms in the query
    int oov_terms = 0;   // distinct terms skipped as out-of-vocabulary
    bool all_oov() const { return query_terms > 0 && oov_terms == query_terms; }
};

/// Simplified Clarity Score:
///   SCS(q) = sum_w p(w|q) * log2(p(w|q) / p(w|C))
/// Out-of-vocabulary query terms are skipped from the sum; p(w|q) keeps the
/// full query length as denominator. All-OOV queries score 0 with the
/// warning reflected in the counters.
ScsResult scs(std::string_view query_text, const CollectionStats& stats,
              const TokenizeOptions& options = {});

struct Qrels {
    // query id -> (doc id -> relevance grade >= 0)
    std::map<std::string, std::map<std::string, int>> grades;

    int grade(const std::string& query_id, const std::string& doc_id) const;
};

/// NDCG@k with gain 2^rel - 1 and log2(rank + 1) discount; the ideal DCG is
/// taken over all judged documents of the query. 0 when the query has no
/// relevant judged documents.
double ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int k);

struct MetricSummary {
    double min = 0.0;
    double max = 0.0;
    double avg = 0.0;
    double std = 0.0; // population (N divisor)
};

MetricSummary summarize(std::span<const double> values);

struct TTestResult {
    double p = 1.0;
    double t = 0.0;
    bool degenerate = false; // zero-variance differences
};

/// Two-sided paired t-test, N-1 degrees of freedom. All-zero differences
/// give p = 1; constant nonzero differences give p = 0, both flagged
/// degenerate instead of failing so evaluation sweeps keep running.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

struct SignificancePair {
    std::string label;
    double raw_p = 1.0;
    bool rejected = false;
};

struct SignificanceResult {
    std::vector<SignificancePair> pairs; // ascending by p value
};

/// Holm-Bonferroni step-down: reject p_(i) while p_(i) <= alpha / (m - i + 1),
/// stopping at the first failure.
SignificanceResult holm_bonferroni(
    std::span<const std::pair<std::string, double>> pvals, double alpha);

} // namespace gqr
