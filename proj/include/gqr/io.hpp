#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gqr/corpus.hpp"
#include "gqr/metrics.hpp"
#include "gqr/prompting.hpp"

namespace gqr {

/// Corpus file: one JSON object per line with "id" and "text" fields.
std::vector<Document> read_corpus_jsonl(const std::string& path);

/// Query file. Lines are either "qid<TAB>text" or bare query text, in which
/// case sequential ids q1, q2, ... are assigned.
std::vector<std::pair<std::string, std::string>> read_queries(
    const std::string& path);

/// TREC qrels: whitespace-separated "qid 0 docid grade" lines.
Qrels read_qrels(const std::string& path);

/// TREC run format: "qid Q0 docid rank score tag".
std::string format_trec_run(std::span<const RankedList> lists,
                            const std::string& tag);
std::vector<RankedList> parse_trec_run(const std::string& text);

/// Prompt example pool: JSONL {"query": ..., "recommendations": [...]}.
std::vector<PromptExample> read_prompt_pool(const std::string& path);

/// Run cache: JSONL {"query_id": ..., "items": [...]} per system so backend
/// calls are replayed, not repeated.
std::map<std::string, RecommendationList> read_run_cache(
    const std::string& path);
void write_run_cache(const std::string& path,
                     const std::map<std::string, RecommendationList>& runs);

void write_audit_log(const std::string& path,
                     std::span<const AuditRecord> records);

std::string slurp(const std::string& path);
void spit(const std::string& path, const std::string& content);

} // namespace gqr
