#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gqr/corpus.hpp"
#include "gqr/metrics.hpp"
#include "gqr/prompting.hpp"

namespace gqr {

enum class Metric { Scs, Ndcg10 };
enum class Protocol { Substitution, Concat };

struct SystemRun {
    std::string system_name;
    std::map<std::string, RecommendationList> per_query; // query id -> list
};

/// Per-rank score lists. per_rank[i] holds rank i+1 as (query id, score)
/// pairs in query-set order. Substitution drops queries lacking that rank;
/// Concat falls back to the longest available prefix, so every query is
/// present at every rank.
struct ProtocolScores {
    Metric metric = Metric::Scs;
    Protocol protocol = Protocol::Substitution;
    int k = 6;
    std::vector<std::vector<std::pair<std::string, double>>> per_rank;
};

/// Substitution(q, i) = r_i (1-based).
std::string substitution(const std::string& query,
                         const RecommendationList& recs, int rank);

/// Concat(q, i) = q joined with the first i recommendations by single spaces.
std::string concat(const std::string& query, const RecommendationList& recs,
                   int rank);

struct EvalContext {
    const InvertedIndex* index = nullptr;
    const Qrels* qrels = nullptr;
    std::span<const std::pair<std::string, std::string>> queries; // (id, text)
    Bm25Params bm25;
    int k = 6;
    int ndcg_cutoff = 10;
    int threads = 0; // <= 0: serial reference path
};

struct SystemScores {
    ProtocolScores scs;
    ProtocolScores ndcg;
};

/// Scores one system under one protocol: for every query and rank, form the
/// protocol text, compute SCS against the collection statistics and NDCG@10
/// over BM25 retrieval. Queries are scored independently (OpenMP when
/// ctx.threads > 0); output is identical on both paths.
SystemScores evaluate_system(const SystemRun& run, Protocol protocol,
                             const EvalContext& ctx);

struct CoverageStats {
    double pct_at_least_one = 0.0;
    double pct_all_k = 0.0;
    double avg_count = 0.0;
};

/// Percentages over the full query set; a query missing from the run counts
/// as zero recommendations.
CoverageStats coverage(const SystemRun& run,
                       std::span<const std::pair<std::string, std::string>> queries,
                       int k);

/// Rank-wise mean scores (index 0 = rank 1). Ranks with no surviving
/// queries yield 0.
std::vector<double> per_rank_means(const ProtocolScores& scores);

/// Substitution table summary: Min/Max/Avg ± Std across the k per-rank means.
MetricSummary substitution_summary(const ProtocolScores& scores);

/// Per-query mean across the ranks the query has values for; used to pair
/// systems for the t-tests.
std::map<std::string, double> per_query_means(const ProtocolScores& scores);

// --- report ------------------------------------------------------------------

struct SubstitutionRow {
    std::string system;
    MetricSummary summary;
    std::string sig; // letters of systems significantly different
};

struct ConcatTableRow {
    std::string system;
    std::vector<double> means;       // one per rank
    std::vector<std::string> sig;    // letters per rank (reference row only)
};

struct CoverageRow {
    std::string system;
    CoverageStats stats;
};

struct EvalReport {
    int k = 6;
    double alpha = 0.01;
    int query_count = 0;
    std::string reference;
    std::vector<std::string> systems;             // row order
    std::map<std::string, std::string> letters;   // system -> a, b, ...

    SubstitutionRow baseline_sub_scs, baseline_sub_ndcg;
    std::vector<SubstitutionRow> sub_scs, sub_ndcg;

    ConcatTableRow baseline_concat_scs, baseline_concat_ndcg;
    std::vector<ConcatTableRow> concat_scs, concat_ndcg;

    std::vector<CoverageRow> coverage_rows;

    // raw Holm results per table ("substitution/scs", "concat/ndcg", ...)
    std::map<std::string, std::vector<SignificancePair>> significance;
};

struct SystemEvaluation {
    SystemRun run;
    SystemScores substitution_scores;
    SystemScores concat_scores;
    CoverageStats coverage_stats;
};

/// Assembles the full report: summaries, per-rank tables, coverage rows, the
/// original-query baseline row, and Holm-Bonferroni significance letters of
/// every non-reference system against the reference.
EvalReport build_report(std::span<const SystemEvaluation> evaluations,
                        const std::string& reference, double alpha,
                        const EvalContext& ctx);

struct GeneratedRun {
    SystemRun run;
    std::vector<AuditRecord> audits; // query-set order
    int backend_errors = 0;
};

using ExampleSelector =
    std::function<std::vector<PromptExample>(std::string_view target)>;

/// Cooperative cancellation flag for generation loops, safe to set from a
/// signal handler. In-flight backend calls finish; remaining queries are
/// skipped and the batch ends with an "interrupted" error.
std::atomic<bool>& interrupt_flag();

/// Generates recommendations for every query with a bounded worker pool.
/// Backend failures are recorded per query (flagged empty list) instead of
/// aborting the batch; audits come back in query-set order regardless of
/// thread interleaving.
GeneratedRun generate_run(
    const std::string& name,
    std::span<const std::pair<std::string, std::string>> queries,
    const ExampleSelector& selector, const GenerationConfig& config,
    CompletionBackend& backend, int threads);

struct SweepRow {
    int size = 0;
    MetricSummary scs;
    MetricSummary ndcg;
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

/// Runs the Substitution evaluation once per prompt size over the same query
/// set and backend, mirroring the prompt-size study grid.
SweepReport sweep_examples(std::span<const int> sizes,
                           std::span<const PromptExample> pool,
                           const GenerationConfig& config,
                           CompletionBackend& backend, const EvalContext& ctx);

} // namespace gqr
