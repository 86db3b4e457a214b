#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace gqr {

struct GenerationConfig {
    double temperature = 0.7;
    int max_tokens = 256;
    int k = 6;          // recommendations per query
    int n_examples = 10;
    int retries = 3;
    std::chrono::milliseconds timeout{30000};

    void validate() const; // throws ConfigError on out-of-range fields
};

struct CompletionRequest {
    std::string prompt;
    GenerationConfig config;
};

struct CompletionResponse {
    std::string text;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
    int retries_used = 0;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// 64-bit stable hash (FNV-1a with a final mix); the single source of
/// deterministic pseudo-randomness for the offline backends.
std::uint64_t stable_hash64(std::uint64_t seed, std::string_view payload,
                            std::uint64_t salt = 0);

/// Deterministic offline backend. For every prompt it answers with one line
/// of k comma-separated items "rec-<h1>, ..., rec-<hk>" where h_i is the
/// stable hash of (seed, prompt, i) rendered as four hex digits (bumped on
/// the rare in-line collision so the items stay distinct). Flaky mode drops
/// each item independently with probability 1 - emit_prob, which exercises
/// the coverage statistics.
class MockBackend : public CompletionBackend {
public:
    explicit MockBackend(std::uint64_t seed, bool flaky = false,
                         double emit_prob = 0.8);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override;

private:
    std::uint64_t seed_;
    bool flaky_;
    double emit_prob_;
};

struct HttpBackendConfig {
    std::string base_url;   // e.g. http://127.0.0.1:8080/v1
    std::string model;
    std::string api_key_env = "GQR_API_KEY";
    std::string stop = "\n\n";
    int backoff_ms = 100;   // exponential backoff base
};

/// OpenAI-compatible completions client: POST {base_url}/completions with
/// {model, prompt, temperature, max_tokens, stop}, reads choices[0].text.
/// Retries transport failures and retryable statuses (429, 5xx) with
/// exponential backoff up to config.retries. The credential is read from the
/// environment at construction and never appears in errors or logs.
class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override;

private:
    HttpBackendConfig config_;
    std::string api_key_;
    std::string host_;  // scheme://host:port
    std::string path_;  // path prefix under the host
};

/// Replaces any occurrence of `secret` in `text` with "***".
std::string redact(std::string text, const std::string& secret);

} // namespace gqr
