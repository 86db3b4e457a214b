#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqr/tokenize.hpp"

namespace gqr {

struct Document {
    std::string id;
    std::string text;
};

/// Collection-level language model counts: p(w|C) = term_count[w] / total_tokens.
struct CollectionStats {
    std::map<std::string, std::int64_t> term_count;
    std::int64_t total_tokens = 0;
    std::int64_t doc_count = 0;
    std::map<std::string, std::int64_t> doc_freq;
    double avg_doc_len = 0.0;

    /// 0 for out-of-vocabulary terms.
    double p_collection(const std::string& term) const;
};

struct Posting {
    std::int32_t doc = 0; // dense handle into doc_ids (ascending id order)
    std::int32_t tf = 0;
};

struct InvertedIndex {
    std::vector<std::string> doc_ids; // sorted ascending; handle == position
    std::vector<std::int32_t> doc_len;
    std::map<std::string, std::vector<Posting>> postings;
    CollectionStats stats;
    TokenizeOptions tokenizer; // how the collection was tokenized
};

struct RankedEntry {
    std::string doc_id;
    double score = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries; // scores nonincreasing, doc ids distinct
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

CollectionStats build_stats(std::span<const Document> docs,
                            const TokenizeOptions& options = {});

InvertedIndex build_index(std::span<const Document> docs,
                          const TokenizeOptions& options = {});

/// idf = ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::int64_t doc_count, std::int64_t doc_freq);

/// Classic BM25 over the inverted index. Ties broken by ascending doc id;
/// at most `cutoff` entries; duplicated query terms score once.
RankedList bm25_search(const InvertedIndex& index, std::string_view query_text,
                       int cutoff, const Bm25Params& params = {});

/// Batch search, one ranked list per (query_id, text) pair. `threads <= 0`
/// runs the serial reference loop; otherwise the queries are scored in an
/// OpenMP parallel-for. Both paths produce identical output.
std::vector<RankedList> bm25_search_many(
    const InvertedIndex& index,
    std::span<const std::pair<std::string, std::string>> queries, int cutoff,
    const Bm25Params& params = {}, int threads = 0);

/// Binary index persistence. Write -> read -> write is byte-identical.
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex load_index(const std::string& path);

} // namespace gqr
