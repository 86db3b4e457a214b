#include "gqr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "gqr/error.hpp"

namespace gqr {

std::map<std::string, double> query_lm(std::span<const std::string> tokens) {
    if (tokens.empty()) throw Error("empty query");
    std::map<std::string, double> probs;
    for (const auto& t : tokens) probs[t] += 1.0;
    const double n = static_cast<double>(tokens.size());
    for (auto& [_, p] : probs) p /= n;
    return probs;
}

ScsResult scs(std::string_view query_text, const CollectionStats& stats,
              const TokenizeOptions& options) {
    auto tokens = tokenize(query_text, options);
    if (tokens.empty()) throw Error("empty query");
    if (stats.total_tokens <= 0) throw Error("collection has no tokens");

    auto lm = query_lm(tokens);
    ScsResult result;
    result.query_terms = static_cast<int>(lm.size());
    for (const auto& [term, p_q] : lm) {
        const double p_c = stats.p_collection(term);
        if (p_c <= 0.0) {
            ++result.oov_terms;
            continue;
        }
        result.value += p_q * std::log2(p_q / p_c);
    }
    if (result.all_oov()) result.value = 0.0;
    return result;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = grades.find(query_id);
    if (q == grades.end()) return 0;
    auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
}

double ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int k) {
    if (k < 1) throw Error("ndcg cutoff must be positive");
    auto judged = qrels.grades.find(ranked.query_id);
    if (judged == qrels.grades.end()) return 0.0;

    auto gain = [](int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; };

    double dcg = 0.0;
    const std::size_t depth =
        std::min(ranked.entries.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i) {
        int rel = qrels.grade(ranked.query_id, ranked.entries[i].doc_id);
        if (rel > 0) dcg += gain(rel) / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<int> ideal;
    ideal.reserve(judged->second.size());
    for (const auto& [_, rel] : judged->second)
        if (rel > 0) ideal.push_back(rel);
    if (ideal.empty()) return 0.0;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    double idcg = 0.0;
    const std::size_t ideal_depth =
        std::min(ideal.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ideal_depth; ++i)
        idcg += gain(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);

    return dcg / idcg;
}

MetricSummary summarize(std::span<const double> values) {
    if (values.empty()) throw Error("empty value list");
    MetricSummary s;
    s.min = values[0];
    s.max = values[0];
    double sum = 0.0;
    for (double v : values) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    const double n = static_cast<double>(values.size());
    s.avg = sum / n;
    double sq = 0.0;
    for (double v : values) sq += (v - s.avg) * (v - s.avg);
    s.std = std::sqrt(sq / n);
    return s;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("paired samples differ in length");
    if (a.size() < 2) throw Error("paired t-test needs at least 2 samples");

    const std::size_t n = a.size();
    double mean_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_d += a[i] - b[i];
    mean_d /= static_cast<double>(n);

    double var_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean_d;
        var_d += d * d;
    }
    var_d /= static_cast<double>(n - 1);

    TTestResult result;
    if (var_d == 0.0) {
        result.degenerate = true;
        result.p = (mean_d == 0.0) ? 1.0 : 0.0;
        result.t = 0.0;
        return result;
    }

    result.t = mean_d / std::sqrt(var_d / static_cast<double>(n));
    boost::math::students_t_distribution<double> dist(
        static_cast<double>(n - 1));
    result.p = 2.0 * boost::math::cdf(boost::math::complement(
                         dist, std::abs(result.t)));
    return result;
}

SignificanceResult holm_bonferroni(
    std::span<const std::pair<std::string, double>> pvals, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0,1)");
    SignificanceResult result;
    result.pairs.reserve(pvals.size());
    for (const auto& [label, p] : pvals) {
        if (p < 0.0 || p > 1.0) throw Error("p-value out of [0,1]: " + label);
        result.pairs.push_back({label, p, false});
    }
    std::stable_sort(result.pairs.begin(), result.pairs.end(),
                     [](const SignificancePair& x, const SignificancePair& y) {
                         if (x.raw_p != y.raw_p) return x.raw_p < y.raw_p;
                         return x.label < y.label;
                     });
    const std::size_t m = result.pairs.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double threshold = alpha / static_cast<double>(m - i);
        if (result.pairs[i].raw_p <= threshold) {
            result.pairs[i].rejected = true;
        } else {
            break; // step-down stops at the first failure
        }
    }
    return result;
}

} // namespace gqr
