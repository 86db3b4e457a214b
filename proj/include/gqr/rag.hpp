#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqr/prompting.hpp"

namespace gqr {

/// Query log grouped into per-task ordered sessions.
struct SessionLog {
    std::vector<std::vector<std::string>> sessions;
};

/// Parses tab-separated "session_id \t query" lines, grouping by session id
/// in order of first appearance. Malformed lines report their line number.
SessionLog ingest_log(std::istream& in);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// L2-normalized vector; throws on empty text or provider failure.
    virtual std::vector<float> embed(std::string_view text) = 0;
    virtual int dims() const = 0;
    virtual std::string id() const = 0;
};

/// Offline deterministic embedder: signed feature hash of character 3-grams
/// of the lowercased text into 256 dimensions, then L2 normalization.
class HashingEmbeddingProvider : public EmbeddingProvider {
public:
    std::vector<float> embed(std::string_view text) override;
    int dims() const override { return 256; }
    std::string id() const override { return "hashing-3gram-256"; }
};

struct HttpEmbeddingConfig {
    std::string base_url; // POST {base_url}/embeddings
    std::string model;
    std::string api_key_env = "GQR_EMBEDDING_API_KEY";
    int dims = 0;         // 0 = accept whatever the server returns
    int retries = 3;
    int backoff_ms = 100;
    int timeout_s = 30;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
    std::vector<float> embed(std::string_view text) override;
    int dims() const override { return config_.dims; }
    std::string id() const override { return "http:" + config_.model; }

private:
    HttpEmbeddingConfig config_;
    std::string api_key_;
    std::string host_;
    std::string path_;
};

struct IndexedQuery {
    std::string query;
    std::int32_t session = 0;  // index into SessionLog.sessions
    std::int32_t position = 0; // first occurrence within the session
    std::vector<float> vec;
};

struct EmbeddingIndex {
    std::vector<IndexedQuery> entries; // deduplicated by exact query string
    int dims = 0;
};

EmbeddingIndex build_embedding_index(const SessionLog& log,
                                     EmbeddingProvider& provider);

struct Neighbor {
    std::string query;
    std::int32_t session = 0;
    std::int32_t position = 0;
    double cosine = 0.0;
};

/// Exact top-n by cosine similarity, descending; ties broken
/// lexicographically by query string; n capped at the index size.
std::vector<Neighbor> knn(const EmbeddingIndex& index,
                          std::span<const float> probe, int n);

/// Batch probe lookup; threads <= 0 runs the serial reference loop.
std::vector<std::vector<Neighbor>> knn_many(
    const EmbeddingIndex& index, std::span<const std::vector<float>> probes,
    int n, int threads = 0);

/// Retrieval-augmented example selection: the nearest logged queries become
/// in-context examples whose recommendation lists are the queries that
/// followed them in their session (up to 6). Neighbors equal to the target
/// or without usable followers are skipped in favour of the next one.
std::vector<PromptExample> compose_dynamic_examples(std::string_view target,
                                                    const SessionLog& log,
                                                    const EmbeddingIndex& index,
                                                    int n,
                                                    EmbeddingProvider& provider);

GenerationResult ra_generate(std::string_view target, const SessionLog& log,
                             const EmbeddingIndex& index,
                             const GenerationConfig& config,
                             CompletionBackend& backend,
                             EmbeddingProvider& provider);

} // namespace gqr
