#include "gqr/llm.hpp"

#include <cstdio>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gqr/error.hpp"

namespace gqr {

void GenerationConfig::validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be positive");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (n_examples < 1) throw ConfigError("n_examples must be >= 1");
    if (retries < 0) throw ConfigError("retries must be >= 0");
}

std::uint64_t stable_hash64(std::uint64_t seed, std::string_view payload,
                            std::uint64_t salt) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix_bytes(&seed, sizeof seed);
    mix_bytes(payload.data(), payload.size());
    mix_bytes(&salt, sizeof salt);
    // splitmix64 finalizer for better avalanche than raw FNV
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

std::string redact(std::string text, const std::string& secret) {
    if (secret.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(secret, pos)) != std::string::npos) {
        text.replace(pos, secret.size(), "***");
        pos += 3;
    }
    return text;
}

// --- mock backend ----------------------------------------------------------

MockBackend::MockBackend(std::uint64_t seed, bool flaky, double emit_prob)
    : seed_(seed), flaky_(flaky), emit_prob_(emit_prob) {}

std::string MockBackend::id() const {
    return (flaky_ ? "mock-flaky:" : "mock:") + std::to_string(seed_);
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw Error("empty prompt");
    std::set<std::uint32_t> used;
    std::string line;
    for (int i = 1; i <= request.config.k; ++i) {
        if (flaky_) {
            const std::uint64_t u = stable_hash64(
                seed_, request.prompt, 0xF1A6'0000ull + static_cast<std::uint64_t>(i));
            const double unit =
                static_cast<double>(u >> 11) * (1.0 / 9007199254740992.0);
            if (unit >= emit_prob_) continue;
        }
        std::uint64_t h =
            stable_hash64(seed_, request.prompt, static_cast<std::uint64_t>(i));
        std::uint32_t code = static_cast<std::uint32_t>(h & 0xffff);
        std::uint64_t bump = 0;
        while (!used.insert(code).second) {
            ++bump;
            h = stable_hash64(seed_, request.prompt,
                              (static_cast<std::uint64_t>(i) << 32) | bump);
            code = static_cast<std::uint32_t>(h & 0xffff);
        }
        char item[16];
        std::snprintf(item, sizeof item, "rec-%04x", code);
        if (!line.empty()) line += ", ";
        line += item;
    }
    CompletionResponse response;
    response.text = std::move(line);
    response.backend_id = id();
    return response;
}

// --- HTTP backend -----------------------------------------------------------

namespace {

// Debug logging of request/response bodies, gated by GQR_DEBUG=1; the
// credential is redacted before anything reaches the log.
bool debug_enabled() {
    static const bool enabled = [] {
        const char* v = std::getenv("GQR_DEBUG");
        return v != nullptr && *v != '\0' && std::string_view(v) != "0";
    }();
    return enabled;
}

void debug_log(const std::string& label, const std::string& body,
               const std::string& secret) {
    if (!debug_enabled()) return;
    std::fprintf(stderr, "[gqr debug] %s: %s\n", label.c_str(),
                 redact(body, secret).c_str());
}

// Splits "scheme://host:port/path" into the client target and path prefix.
void split_url(const std::string& url, std::string& host, std::string& path) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host = url;
        path.clear();
    } else {
        host = url.substr(0, path_start);
        path = url.substr(path_start);
        while (!path.empty() && path.back() == '/') path.pop_back();
    }
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

} // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw ConfigError("http backend requires an endpoint url");
    if (config_.api_key_env.empty())
        throw ConfigError("http backend requires api_key_env");
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("credential environment variable not set: " +
                          config_.api_key_env);
    api_key_ = key;
    split_url(config_.base_url, host_, path_);
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw Error("empty prompt");

    nlohmann::json body{{"model", config_.model},
                        {"prompt", request.prompt},
                        {"temperature", request.config.temperature},
                        {"max_tokens", request.config.max_tokens}};
    if (!config_.stop.empty()) body["stop"] = config_.stop;
    const std::string payload = body.dump();
    debug_log("completion request", payload, api_key_);

    const auto started = std::chrono::steady_clock::now();
    const int attempts = request.config.retries + 1;
    std::string last_error;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                config_.backoff_ms * (1 << (attempt - 1))));
        }
        httplib::Client client(host_);
        const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(
            request.config.timeout);
        client.set_connection_timeout(std::max<long>(1, timeout_s.count()), 0);
        client.set_read_timeout(std::max<long>(1, timeout_s.count()), 0);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

        auto res = client.Post(path_ + "/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            debug_log("completion response", res->body, api_key_);
            CompletionResponse response;
            try {
                auto parsed = nlohmann::json::parse(res->body);
                response.text =
                    parsed.at("choices").at(0).value("text", std::string{});
            } catch (const nlohmann::json::exception& ex) {
                throw Error(redact(
                    std::string("malformed completion response: ") + ex.what(),
                    api_key_));
            }
            response.backend_id = id();
            response.retries_used = attempt;
            response.latency =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started);
            return response;
        }
        if (!retryable_status(res->status)) {
            throw Error(redact("backend http status " +
                                   std::to_string(res->status) + ": " + res->body,
                               api_key_));
        }
        last_error = "http status " + std::to_string(res->status);
    }
    throw Error(redact("backend unavailable: " + last_error, api_key_));
}

} // namespace gqr
