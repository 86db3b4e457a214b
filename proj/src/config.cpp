#include "gqr/config.hpp"

#include <filesystem>
#include <fstream>

#include "gqr/error.hpp"

namespace gqr {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected boolean, got \"" +
                      std::string(v) + "\"");
}

double parse_double(std::string_view v, const std::string& key) {
    try {
        std::size_t used = 0;
        double out = std::stod(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("trailing chars");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected number, got \"" +
                          std::string(v) + "\"");
    }
}

std::int64_t parse_int(std::string_view v, const std::string& key) {
    try {
        std::size_t used = 0;
        std::int64_t out = std::stoll(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("trailing chars");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected integer, got \"" +
                          std::string(v) + "\"");
    }
}

} // namespace

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError("missing configuration: " + what);
    if (!file_exists(path))
        throw ConfigError(what + " not found: " + path);
}

void RunConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": expected key = value");
        std::string key(trim(view.substr(0, eq)));
        std::string value(trim(view.substr(eq + 1)));

        if (key == "corpus") corpus_path = value;
        else if (key == "index") index_path = value;
        else if (key == "qrels") qrels_path = value;
        else if (key == "queries") queries_path = value;
        else if (key == "prompt_pool") prompt_pool_path = value;
        else if (key == "sessions") session_log_path = value;
        else if (key == "backend") backend = value;
        else if (key == "embedding_provider") embedding_provider = value;
        else if (key == "endpoint_url") http.base_url = value;
        else if (key == "model") http.model = value;
        else if (key == "api_key_env") http.api_key_env = value;
        else if (key == "embed_endpoint_url") embedding_http.base_url = value;
        else if (key == "embed_model") embedding_http.model = value;
        else if (key == "embed_api_key_env") embedding_http.api_key_env = value;
        else if (key == "mock_flaky") mock_flaky = parse_bool(value, key);
        else if (key == "mock_emit_prob") mock_emit_prob = parse_double(value, key);
        else if (key == "temperature") generation.temperature = parse_double(value, key);
        else if (key == "max_tokens") generation.max_tokens = static_cast<int>(parse_int(value, key));
        else if (key == "k") generation.k = static_cast<int>(parse_int(value, key));
        else if (key == "n_examples") generation.n_examples = static_cast<int>(parse_int(value, key));
        else if (key == "retries") generation.retries = static_cast<int>(parse_int(value, key));
        else if (key == "timeout_ms") generation.timeout = std::chrono::milliseconds(parse_int(value, key));
        else if (key == "stopwords") tokenizer.remove_stopwords = parse_bool(value, key);
        else if (key == "stemming") tokenizer.stem = parse_bool(value, key);
        else if (key == "k1") bm25.k1 = parse_double(value, key);
        else if (key == "b") bm25.b = parse_double(value, key);
        else if (key == "alpha") alpha = parse_double(value, key);
        else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, key));
        else if (key == "workers") workers = static_cast<int>(parse_int(value, key));
        else
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": unknown key \"" + key + "\"");
    }
}

void RunConfig::validate() const {
    generation.validate();
    if (backend != "mock" && backend != "http")
        throw ConfigError("backend must be mock or http");
    if (embedding_provider != "hashing" && embedding_provider != "http")
        throw ConfigError("embedding_provider must be hashing or http");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must be in (0,1)");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (bm25.k1 <= 0.0) throw ConfigError("k1 must be positive");
    if (bm25.b < 0.0 || bm25.b > 1.0) throw ConfigError("b must be in [0,1]");
    if (mock_emit_prob < 0.0 || mock_emit_prob > 1.0)
        throw ConfigError("mock_emit_prob must be in [0,1]");
}

} // namespace gqr
