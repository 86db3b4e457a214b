#include "gqr/prompting.hpp"

#include <algorithm>

#include "gqr/error.hpp"
#include "gqr/tokenize.hpp"

namespace gqr {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

PromptExample make_prompt_example(std::string query,
                                  std::vector<std::string> recommendations) {
    if (query.empty()) throw Error("example query is empty");
    if (recommendations.empty() || recommendations.size() > 10)
        throw Error("example needs 1..10 recommendations");
    for (const auto& item : recommendations) {
        if (item.empty()) throw Error("empty recommendation item");
        if (item.find(',') != std::string::npos)
            throw Error("separator character in item: " + item);
    }
    return PromptExample{std::move(query), std::move(recommendations)};
}

std::string format_example(const PromptExample& example) {
    std::string out = "query: " + example.query + "\nrecommendations: ";
    for (std::size_t i = 0; i < example.recommendations.size(); ++i) {
        if (i > 0) out += ", ";
        out += example.recommendations[i];
    }
    return out;
}

std::string build_prompt(std::span<const PromptExample> examples,
                         std::string_view target) {
    if (examples.empty()) throw Error("prompt needs at least one example");
    if (target.empty()) throw Error("empty target query");
    std::string prompt;
    for (const auto& example : examples) {
        if (iequals(example.query, target))
            throw Error("target collides with example: " + example.query);
        prompt += format_example(example);
        prompt += '\n';
    }
    prompt += "query: ";
    prompt += target;
    prompt += "\nrecommendations:";
    return prompt;
}

RecommendationList parse_recommendations(std::string_view continuation, int k,
                                         std::string_view target) {
    RecommendationList result;

    // First non-blank line; anything after it is the caller's to log.
    std::string_view line;
    std::size_t start = 0;
    while (start < continuation.size()) {
        std::size_t end = continuation.find('\n', start);
        if (end == std::string_view::npos) end = continuation.size();
        line = trim(continuation.substr(start, end - start));
        if (!line.empty()) break;
        start = end + 1;
    }

    std::vector<std::string> lowered;
    std::size_t pos = 0;
    while (pos <= line.size() && !line.empty()) {
        std::size_t comma = line.find(',', pos);
        std::string_view piece = comma == std::string_view::npos
                                     ? line.substr(pos)
                                     : line.substr(pos, comma - pos);
        piece = trim(piece);
        if (!piece.empty() && !iequals(piece, target)) {
            std::string low = to_lower(piece);
            if (std::find(lowered.begin(), lowered.end(), low) ==
                lowered.end()) {
                lowered.push_back(std::move(low));
                result.items.emplace_back(piece);
            }
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }

    if (result.items.size() > static_cast<std::size_t>(k))
        result.items.resize(static_cast<std::size_t>(k));
    result.generation_failed = result.items.empty();
    return result;
}

GenerationResult generate(std::string_view target,
                          std::span<const PromptExample> examples,
                          const GenerationConfig& config,
                          CompletionBackend& backend) {
    GenerationResult result;
    result.audit.query = std::string(target);
    result.audit.prompt = build_prompt(examples, target);

    CompletionRequest request{result.audit.prompt, config};
    CompletionResponse response = backend.complete(request);
    result.audit.raw_continuation = response.text;

    result.recs = parse_recommendations(response.text, config.k, target);
    result.recs.query_id = std::string(target);
    result.audit.parsed_items = result.recs.items;
    if (result.recs.generation_failed)
        result.audit.flags.push_back("generation_failed");
    return result;
}

std::vector<PromptExample> select_examples(
    std::span<const PromptExample> pool, int n, std::string_view target) {
    std::vector<PromptExample> selected;
    for (const auto& example : pool) {
        if (static_cast<int>(selected.size()) >= n) break;
        if (iequals(example.query, target)) continue;
        selected.push_back(example);
    }
    return selected;
}

} // namespace gqr
