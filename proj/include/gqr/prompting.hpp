#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqr/llm.hpp"

namespace gqr {

/// One in-context example: a query with its recommendation list.
struct PromptExample {
    std::string query;
    std::vector<std::string> recommendations;
};

/// Validating constructor: query nonempty, 1..10 recommendations, items
/// nonempty and free of the comma separator.
PromptExample make_prompt_example(std::string query,
                                  std::vector<std::string> recommendations);

struct RecommendationList {
    std::string query_id;
    std::vector<std::string> items;
    bool generation_failed = false;
};

/// Two lines: "query: <q>" and "recommendations: <r1>, <r2>, ...".
std::string format_example(const PromptExample& example);

/// Formatted examples separated by newlines, then "query: <target>" and a
/// bare "recommendations:" for the model to continue.
std::string build_prompt(std::span<const PromptExample> examples,
                         std::string_view target);

/// First non-blank line of the continuation, comma-split, trimmed,
/// case-insensitively deduplicated, target dropped, truncated to k. Zero
/// surviving items set generation_failed instead of throwing.
RecommendationList parse_recommendations(std::string_view continuation, int k,
                                         std::string_view target);

struct AuditRecord {
    std::string query;
    std::string prompt;
    std::string raw_continuation;
    std::vector<std::string> parsed_items;
    std::vector<std::string> flags;
};

struct GenerationResult {
    RecommendationList recs;
    AuditRecord audit;
};

/// build_prompt -> backend.complete -> parse_recommendations, with the prompt
/// and raw continuation captured for the audit log.
GenerationResult generate(std::string_view target,
                          std::span<const PromptExample> examples,
                          const GenerationConfig& config,
                          CompletionBackend& backend);

/// First n pool examples whose query does not collide with the target
/// (case-insensitive).
std::vector<PromptExample> select_examples(
    std::span<const PromptExample> pool, int n, std::string_view target);

} // namespace gqr
