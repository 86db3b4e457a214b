#pragma once

#include <cstdint>
#include <string>

#include "gqr/corpus.hpp"
#include "gqr/llm.hpp"
#include "gqr/rag.hpp"

namespace gqr {

/// Run configuration, merged as flags > config file > defaults.
struct RunConfig {
    // data files
    std::string corpus_path;
    std::string index_path;
    std::string qrels_path;
    std::string queries_path;
    std::string prompt_pool_path;
    std::string session_log_path;

    // backends
    std::string backend = "mock";            // mock | http
    std::string embedding_provider = "hashing"; // hashing | http
    HttpBackendConfig http;
    HttpEmbeddingConfig embedding_http;
    bool mock_flaky = false;
    double mock_emit_prob = 0.8;

    GenerationConfig generation;
    TokenizeOptions tokenizer;
    Bm25Params bm25;

    double alpha = 0.01;
    std::uint64_t seed = 42;
    int workers = 4;

    /// Parses "key = value" lines ('#' comments, blank lines ignored) on top
    /// of the current values. Unknown keys are an error.
    void apply_file(const std::string& path);

    /// Range checks; `require` lists files that must exist for the command.
    void validate() const;
};

bool file_exists(const std::string& path);
void require_file(const std::string& path, const std::string& what);

} // namespace gqr
