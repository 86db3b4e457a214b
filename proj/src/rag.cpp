#include "gqr/rag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gqr/error.hpp"
#include "gqr/tokenize.hpp"

namespace gqr {

SessionLog ingest_log(std::istream& in) {
    SessionLog log;
    std::map<std::string, std::size_t> session_slot;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error("session log line " + std::to_string(line_no) +
                        ": missing tab separator");
        std::string session_id = line.substr(0, tab);
        std::string query = line.substr(tab + 1);
        if (session_id.empty() || query.empty())
            throw Error("session log line " + std::to_string(line_no) +
                        ": empty field");
        auto [it, fresh] = session_slot.emplace(session_id, log.sessions.size());
        if (fresh) log.sessions.emplace_back();
        log.sessions[it->second].push_back(std::move(query));
    }
    return log;
}

// --- embedding providers ----------------------------------------------------

namespace {

void l2_normalize(std::vector<float>& v) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error("zero-norm embedding");
    for (float& x : v) x = static_cast<float>(x / norm);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::vector<float> HashingEmbeddingProvider::embed(std::string_view text) {
    if (text.empty()) throw Error("empty text");
    const std::string lowered = to_lower(text);
    std::vector<float> v(256, 0.0f);
    auto add_gram = [&v](std::string_view gram) {
        const std::uint64_t h = fnv1a(gram);
        const std::size_t dim = static_cast<std::size_t>(h & 0xff);
        const float sign = ((h >> 8) & 1) ? 1.0f : -1.0f;
        v[dim] += sign;
    };
    if (lowered.size() < 3) {
        add_gram(lowered);
    } else {
        for (std::size_t i = 0; i + 3 <= lowered.size(); ++i)
            add_gram(std::string_view(lowered).substr(i, 3));
    }
    l2_normalize(v);
    return v;
}

namespace {

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

} // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config)
    : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw ConfigError("embedding provider requires an endpoint url");
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("credential environment variable not set: " +
                          config_.api_key_env);
    api_key_ = key;
    split_url(config_.base_url, host_, path_);
}

std::vector<float> HttpEmbeddingProvider::embed(std::string_view text) {
    if (text.empty()) throw Error("empty text");
    nlohmann::json body{{"model", config_.model},
                        {"input", std::string(text)}};
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                config_.backoff_ms * (1 << (attempt - 1))));
        }
        httplib::Client client(host_);
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(path_ + "/embeddings", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            std::vector<float> v;
            try {
                auto parsed = nlohmann::json::parse(res->body);
                for (const auto& x :
                     parsed.at("data").at(0).at("embedding"))
                    v.push_back(x.get<float>());
            } catch (const nlohmann::json::exception& ex) {
                throw Error(std::string("malformed embedding response: ") +
                            ex.what());
            }
            if (config_.dims > 0 &&
                v.size() != static_cast<std::size_t>(config_.dims))
                throw Error("embedding dims mismatch");
            l2_normalize(v);
            return v;
        }
        if (res->status == 408 || res->status == 429 || res->status >= 500) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        throw Error(redact("embedding http status " +
                               std::to_string(res->status) + ": " + res->body,
                           api_key_));
    }
    throw Error("embedding provider unavailable: " + last_error);
}

// --- index + retrieval -------------------------------------------------------

EmbeddingIndex build_embedding_index(const SessionLog& log,
                                     EmbeddingProvider& provider) {
    EmbeddingIndex index;
    index.dims = provider.dims();
    std::unordered_set<std::string> seen;
    for (std::size_t s = 0; s < log.sessions.size(); ++s) {
        const auto& session = log.sessions[s];
        for (std::size_t pos = 0; pos < session.size(); ++pos) {
            const std::string& query = session[pos];
            if (!seen.insert(query).second) continue;
            IndexedQuery entry;
            entry.query = query;
            entry.session = static_cast<std::int32_t>(s);
            entry.position = static_cast<std::int32_t>(pos);
            entry.vec = provider.embed(query);
            if (index.dims == 0) index.dims = static_cast<int>(entry.vec.size());
            if (entry.vec.size() != static_cast<std::size_t>(index.dims))
                throw Error("embedding dims mismatch");
            index.entries.push_back(std::move(entry));
        }
    }
    return index;
}

namespace {

double cosine(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

std::vector<Neighbor> knn(const EmbeddingIndex& index,
                          std::span<const float> probe, int n) {
    if (index.entries.empty()) throw Error("empty embedding index");
    if (probe.size() != static_cast<std::size_t>(index.dims))
        throw Error("probe dims mismatch");
    if (n < 1) throw Error("n must be positive");

    std::vector<Neighbor> all;
    all.reserve(index.entries.size());
    for (const auto& entry : index.entries) {
        all.push_back({entry.query, entry.session, entry.position,
                       cosine(probe, entry.vec)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.query < b.query;
    });
    if (all.size() > static_cast<std::size_t>(n))
        all.resize(static_cast<std::size_t>(n));
    return all;
}

std::vector<std::vector<Neighbor>> knn_many(
    const EmbeddingIndex& index, std::span<const std::vector<float>> probes,
    int n, int threads) {
    std::vector<std::vector<Neighbor>> out(probes.size());
    if (threads <= 0) {
        for (std::size_t i = 0; i < probes.size(); ++i)
            out[i] = knn(index, probes[i], n);
        return out;
    }
    const std::int64_t count = static_cast<std::int64_t>(probes.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < count; ++i) out[i] = knn(index, probes[i], n);
    return out;
}

std::vector<PromptExample> compose_dynamic_examples(
    std::string_view target, const SessionLog& log, const EmbeddingIndex& index,
    int n, EmbeddingProvider& provider) {
    if (n < 1) throw Error("n must be positive");
    auto probe = provider.embed(target);
    auto neighbors = knn(index, probe, static_cast<int>(index.entries.size()));

    std::vector<PromptExample> examples;
    for (const Neighbor& nb : neighbors) {
        if (static_cast<int>(examples.size()) >= n) break;
        if (iequals(nb.query, target)) continue;
        const auto& session = log.sessions.at(static_cast<std::size_t>(nb.session));
        std::vector<std::string> followers;
        for (std::size_t i = static_cast<std::size_t>(nb.position) + 1;
             i < session.size() && followers.size() < 6; ++i) {
            // PromptExample forbids the separator; skip followers carrying it.
            if (session[i].empty() ||
                session[i].find(',') != std::string::npos)
                continue;
            followers.push_back(session[i]);
        }
        if (followers.empty()) continue; // no reformulation signal, next neighbor
        examples.push_back(make_prompt_example(nb.query, std::move(followers)));
    }
    if (examples.empty()) throw Error("insufficient log coverage");
    return examples;
}

GenerationResult ra_generate(std::string_view target, const SessionLog& log,
                             const EmbeddingIndex& index,
                             const GenerationConfig& config,
                             CompletionBackend& backend,
                             EmbeddingProvider& provider) {
    auto examples =
        compose_dynamic_examples(target, log, index, config.n_examples, provider);
    auto result = generate(target, examples, config, backend);
    result.audit.flags.push_back("rag");
    return result;
}

} // namespace gqr
