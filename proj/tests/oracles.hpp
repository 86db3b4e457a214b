// Independent reference implementations used as test oracles. Kept apart
// from the library code paths they check: scores are recomputed directly
// from raw token streams, and NDCG's ideal ranking comes from exhaustive
// permutation search.
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace oracles {

/// SCS recomputed from scratch: collection counts come from rescanning the
/// document token streams, not from CollectionStats.
double scs_direct(const std::vector<std::string>& query_tokens,
                  const std::vector<std::vector<std::string>>& doc_tokens);

struct ScoredDoc {
    std::string id;
    double score;
};

/// Brute-force BM25: every document scored directly from its token stream,
/// full sort by (score desc, id asc), zero scores dropped, cutoff applied.
std::vector<ScoredDoc> bm25_direct(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
    const std::vector<std::string>& query_tokens, double k1, double b,
    int cutoff);

/// NDCG with the ideal DCG found by trying every permutation of the judged
/// grades (feasible for <= 6 judged documents).
double ndcg_permutation(const std::vector<int>& ranked_grades,
                        std::vector<int> judged_grades, int k);

double cosine_direct(const std::vector<float>& a, const std::vector<float>& b);

struct NeighborRef {
    std::string query;
    double cosine;
};

/// Exhaustive scan: cosine against every entry, full sort, truncate.
std::vector<NeighborRef> knn_scan(
    const std::vector<std::pair<std::string, std::vector<float>>>& entries,
    const std::vector<float>& probe, int n);

} // namespace oracles
