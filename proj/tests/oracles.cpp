#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace oracles {

double scs_direct(const std::vector<std::string>& query_tokens,
                  const std::vector<std::vector<std::string>>& doc_tokens) {
    std::map<std::string, long> collection_count;
    long collection_total = 0;
    for (const auto& doc : doc_tokens) {
        for (const auto& token : doc) {
            collection_count[token] += 1;
            ++collection_total;
        }
    }

    std::map<std::string, long> query_count;
    for (const auto& token : query_tokens) query_count[token] += 1;
    const double query_len = static_cast<double>(query_tokens.size());

    double value = 0.0;
    for (const auto& [term, count] : query_count) {
        auto it = collection_count.find(term);
        if (it == collection_count.end()) continue;
        const double p_q = static_cast<double>(count) / query_len;
        const double p_c = static_cast<double>(it->second) /
                           static_cast<double>(collection_total);
        value += p_q * std::log2(p_q / p_c);
    }
    return value;
}

std::vector<ScoredDoc> bm25_direct(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
    const std::vector<std::string>& query_tokens, double k1, double b,
    int cutoff) {
    const std::size_t n_docs = docs.size();
    long total_tokens = 0;
    for (const auto& [_, tokens] : docs)
        total_tokens += static_cast<long>(tokens.size());
    const double avgdl =
        static_cast<double>(total_tokens) / static_cast<double>(n_docs);

    std::set<std::string> terms(query_tokens.begin(), query_tokens.end());

    std::map<std::string, std::int64_t> df;
    for (const auto& term : terms) {
        std::int64_t n = 0;
        for (const auto& [_, tokens] : docs) {
            if (std::find(tokens.begin(), tokens.end(), term) != tokens.end())
                ++n;
        }
        if (n > 0) df[term] = n;
    }

    std::vector<ScoredDoc> scored;
    for (const auto& [id, tokens] : docs) {
        double score = 0.0;
        const double dl = static_cast<double>(tokens.size());
        for (const auto& term : terms) {
            auto dfit = df.find(term);
            if (dfit == df.end()) continue;
            const double tf = static_cast<double>(
                std::count(tokens.begin(), tokens.end(), term));
            if (tf == 0.0) continue;
            const double idf =
                std::log((static_cast<double>(n_docs) - dfit->second + 0.5) /
                             (dfit->second + 0.5) +
                         1.0);
            score += idf * tf * (k1 + 1.0) /
                     (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if (score > 0.0) scored.push_back({id, score});
    }
    std::sort(scored.begin(), scored.end(),
              [](const ScoredDoc& x, const ScoredDoc& y) {
                  if (x.score != y.score) return x.score > y.score;
                  return x.id < y.id;
              });
    if (cutoff >= 0 && scored.size() > static_cast<std::size_t>(cutoff))
        scored.resize(static_cast<std::size_t>(cutoff));
    return scored;
}

namespace {

double dcg(const std::vector<int>& grades, int k) {
    double total = 0.0;
    const std::size_t depth =
        std::min(grades.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i) {
        const double gain = std::exp2(static_cast<double>(grades[i])) - 1.0;
        total += gain / std::log2(static_cast<double>(i) + 2.0);
    }
    return total;
}

} // namespace

double ndcg_permutation(const std::vector<int>& ranked_grades,
                        std::vector<int> judged_grades, int k) {
    std::sort(judged_grades.begin(), judged_grades.end());
    double ideal = 0.0;
    do {
        ideal = std::max(ideal, dcg(judged_grades, k));
    } while (std::next_permutation(judged_grades.begin(), judged_grades.end()));
    if (ideal == 0.0) return 0.0;
    return dcg(ranked_grades, k) / ideal;
}

double cosine_direct(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<NeighborRef> knn_scan(
    const std::vector<std::pair<std::string, std::vector<float>>>& entries,
    const std::vector<float>& probe, int n) {
    std::vector<NeighborRef> all;
    all.reserve(entries.size());
    for (const auto& [query, vec] : entries)
        all.push_back({query, cosine_direct(probe, vec)});
    std::sort(all.begin(), all.end(),
              [](const NeighborRef& x, const NeighborRef& y) {
                  if (x.cosine != y.cosine) return x.cosine > y.cosine;
                  return x.query < y.query;
              });
    if (all.size() > static_cast<std::size_t>(n))
        all.resize(static_cast<std::size_t>(n));
    return all;
}

} // namespace oracles
