#include "gqr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gqr/error.hpp"

namespace gqr {

std::string substitution(const std::string& query,
                         const RecommendationList& recs, int rank) {
    (void)query;
    if (rank < 1 || static_cast<std::size_t>(rank) > recs.items.size())
        throw Error("missing rank");
    return recs.items[static_cast<std::size_t>(rank - 1)];
}

std::string concat(const std::string& query, const RecommendationList& recs,
                   int rank) {
    if (rank < 1 || static_cast<std::size_t>(rank) > recs.items.size())
        throw Error("missing rank");
    std::string out = query;
    for (int i = 0; i < rank; ++i) {
        out += ' ';
        out += recs.items[static_cast<std::size_t>(i)];
    }
    return out;
}

namespace {

struct CellScore {
    bool present = false;
    double scs = 0.0;
    double ndcg = 0.0;
};

const RecommendationList* find_recs(const SystemRun& run,
                                    const std::string& query_id) {
    auto it = run.per_query.find(query_id);
    return it == run.per_query.end() ? nullptr : &it->second;
}

// Scores one (query, rank) cell; absent when the protocol text is not
// formable or carries no tokens.
CellScore score_cell(const SystemRun& run, Protocol protocol,
                     const EvalContext& ctx, const std::string& query_id,
                     const std::string& query_text, int rank) {
    static const RecommendationList kEmpty{};
    const RecommendationList* recs = find_recs(run, query_id);
    if (recs == nullptr) recs = &kEmpty;

    std::string text;
    if (protocol == Protocol::Substitution) {
        if (static_cast<std::size_t>(rank) > recs->items.size()) return {};
        text = substitution(query_text, *recs, rank);
    } else {
        const int prefix =
            std::min<int>(rank, static_cast<int>(recs->items.size()));
        text = prefix == 0 ? query_text : concat(query_text, *recs, prefix);
    }

    CellScore cell;
    auto tokens = tokenize(text, ctx.index->tokenizer);
    if (tokens.empty()) return {};
    cell.present = true;
    cell.scs = scs(text, ctx.index->stats, ctx.index->tokenizer).value;

    RankedList ranked = bm25_search(*ctx.index, text, ctx.ndcg_cutoff, ctx.bm25);
    ranked.query_id = query_id; // relevance w.r.t. the original information need
    cell.ndcg = ndcg_at_k(ranked, *ctx.qrels, ctx.ndcg_cutoff);
    return cell;
}

} // namespace

SystemScores evaluate_system(const SystemRun& run, Protocol protocol,
                             const EvalContext& ctx) {
    if (ctx.queries.empty()) throw Error("empty query set");
    if (ctx.index == nullptr || ctx.qrels == nullptr)
        throw Error("evaluation context incomplete");

    const std::size_t n_queries = ctx.queries.size();
    const int k = ctx.k;
    std::vector<std::vector<CellScore>> cells(
        n_queries, std::vector<CellScore>(static_cast<std::size_t>(k)));

    if (ctx.threads <= 0) {
        for (std::size_t q = 0; q < n_queries; ++q)
            for (int r = 1; r <= k; ++r)
                cells[q][static_cast<std::size_t>(r - 1)] =
                    score_cell(run, protocol, ctx, ctx.queries[q].first,
                               ctx.queries[q].second, r);
    } else {
        const std::int64_t total = static_cast<std::int64_t>(n_queries);
#pragma omp parallel for schedule(dynamic) num_threads(ctx.threads)
        for (std::int64_t q = 0; q < total; ++q)
            for (int r = 1; r <= k; ++r)
                cells[static_cast<std::size_t>(q)][static_cast<std::size_t>(r - 1)] =
                    score_cell(run, protocol, ctx,
                               ctx.queries[static_cast<std::size_t>(q)].first,
                               ctx.queries[static_cast<std::size_t>(q)].second, r);
    }

    SystemScores scores;
    scores.scs.metric = Metric::Scs;
    scores.ndcg.metric = Metric::Ndcg10;
    for (ProtocolScores* ps : {&scores.scs, &scores.ndcg}) {
        ps->protocol = protocol;
        ps->k = k;
        ps->per_rank.assign(static_cast<std::size_t>(k), {});
    }
    for (int r = 0; r < k; ++r) {
        for (std::size_t q = 0; q < n_queries; ++q) {
            const CellScore& cell = cells[q][static_cast<std::size_t>(r)];
            if (!cell.present) continue;
            scores.scs.per_rank[static_cast<std::size_t>(r)].emplace_back(
                ctx.queries[q].first, cell.scs);
            scores.ndcg.per_rank[static_cast<std::size_t>(r)].emplace_back(
                ctx.queries[q].first, cell.ndcg);
        }
    }
    return scores;
}

CoverageStats coverage(
    const SystemRun& run,
    std::span<const std::pair<std::string, std::string>> queries, int k) {
    if (queries.empty()) throw Error("empty query set");
    std::size_t at_least_one = 0;
    std::size_t all_k = 0;
    double total = 0.0;
    for (const auto& [query_id, _] : queries) {
        const RecommendationList* recs = find_recs(run, query_id);
        const std::size_t count = recs == nullptr ? 0 : recs->items.size();
        if (count >= 1) ++at_least_one;
        if (count >= static_cast<std::size_t>(k)) ++all_k;
        total += static_cast<double>(count);
    }
    const double n = static_cast<double>(queries.size());
    return {100.0 * static_cast<double>(at_least_one) / n,
            100.0 * static_cast<double>(all_k) / n, total / n};
}

std::vector<double> per_rank_means(const ProtocolScores& scores) {
    std::vector<double> means;
    means.reserve(scores.per_rank.size());
    for (const auto& rank_list : scores.per_rank) {
        if (rank_list.empty()) {
            means.push_back(0.0);
            continue;
        }
        double sum = 0.0;
        for (const auto& [_, v] : rank_list) sum += v;
        means.push_back(sum / static_cast<double>(rank_list.size()));
    }
    return means;
}

MetricSummary substitution_summary(const ProtocolScores& scores) {
    auto means = per_rank_means(scores);
    return summarize(means);
}

std::map<std::string, double> per_query_means(const ProtocolScores& scores) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& rank_list : scores.per_rank)
        for (const auto& [qid, v] : rank_list) {
            acc[qid].first += v;
            acc[qid].second += 1;
        }
    std::map<std::string, double> means;
    for (const auto& [qid, sums] : acc)
        means[qid] = sums.first / static_cast<double>(sums.second);
    return means;
}

// --- report assembly ----------------------------------------------------------

namespace {

std::string letter_for(std::size_t position) {
    std::string s;
    s.push_back(static_cast<char>('a' + position));
    return s;
}

// Paired vectors over query ids both systems scored.
bool paired_vectors(const std::map<std::string, double>& a,
                    const std::map<std::string, double>& b,
                    std::vector<double>& va, std::vector<double>& vb) {
    va.clear();
    vb.clear();
    for (const auto& [qid, value] : a) {
        auto it = b.find(qid);
        if (it == b.end()) continue;
        va.push_back(value);
        vb.push_back(it->second);
    }
    return va.size() >= 2;
}

std::map<std::string, double> rank_scores(const ProtocolScores& scores,
                                          int rank) {
    std::map<std::string, double> out;
    for (const auto& [qid, v] :
         scores.per_rank[static_cast<std::size_t>(rank - 1)])
        out[qid] = v;
    return out;
}

} // namespace

EvalReport build_report(std::span<const SystemEvaluation> evaluations,
                        const std::string& reference, double alpha,
                        const EvalContext& ctx) {
    if (evaluations.empty()) throw Error("no systems to report");
    EvalReport report;
    report.k = ctx.k;
    report.alpha = alpha;
    report.query_count = static_cast<int>(ctx.queries.size());
    report.reference = reference;

    std::size_t ref_pos = evaluations.size();
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
        report.systems.push_back(evaluations[i].run.system_name);
        if (evaluations[i].run.system_name == reference) ref_pos = i;
    }
    if (ref_pos == evaluations.size())
        throw Error("reference system not in evaluation set: " + reference);

    std::size_t next_letter = 0;
    for (const auto& eval : evaluations) {
        if (eval.run.system_name == reference) continue;
        report.letters[eval.run.system_name] = letter_for(next_letter++);
    }

    // Original-query baseline: every recommendation replaced by q itself.
    double base_scs = 0.0, base_ndcg = 0.0;
    {
        std::size_t counted = 0;
        for (const auto& [qid, text] : ctx.queries) {
            auto tokens = tokenize(text, ctx.index->tokenizer);
            if (tokens.empty()) continue;
            base_scs += scs(text, ctx.index->stats, ctx.index->tokenizer).value;
            RankedList ranked =
                bm25_search(*ctx.index, text, ctx.ndcg_cutoff, ctx.bm25);
            ranked.query_id = qid;
            base_ndcg += ndcg_at_k(ranked, *ctx.qrels, ctx.ndcg_cutoff);
            ++counted;
        }
        if (counted > 0) {
            base_scs /= static_cast<double>(counted);
            base_ndcg /= static_cast<double>(counted);
        }
    }
    report.baseline_sub_scs = {"original query",
                               {base_scs, base_scs, base_scs, 0.0},
                               ""};
    report.baseline_sub_ndcg = {"original query",
                                {base_ndcg, base_ndcg, base_ndcg, 0.0},
                                ""};
    report.baseline_concat_scs = {
        "original query",
        std::vector<double>(static_cast<std::size_t>(ctx.k), base_scs),
        std::vector<std::string>(static_cast<std::size_t>(ctx.k), "")};
    report.baseline_concat_ndcg = {
        "original query",
        std::vector<double>(static_cast<std::size_t>(ctx.k), base_ndcg),
        std::vector<std::string>(static_cast<std::size_t>(ctx.k), "")};

    for (const auto& eval : evaluations) {
        report.sub_scs.push_back({eval.run.system_name,
                                  substitution_summary(eval.substitution_scores.scs),
                                  ""});
        report.sub_ndcg.push_back(
            {eval.run.system_name,
             substitution_summary(eval.substitution_scores.ndcg), ""});
        report.concat_scs.push_back(
            {eval.run.system_name, per_rank_means(eval.concat_scores.scs),
             std::vector<std::string>(static_cast<std::size_t>(ctx.k), "")});
        report.concat_ndcg.push_back(
            {eval.run.system_name, per_rank_means(eval.concat_scores.ndcg),
             std::vector<std::string>(static_cast<std::size_t>(ctx.k), "")});
        report.coverage_rows.push_back(
            {eval.run.system_name, eval.coverage_stats});
    }

    // Significance: each non-reference system against the reference, one Holm
    // family per table. Substitution pairs per-query means across ranks;
    // Concat pairs per-query scores at each rank.
    const SystemEvaluation& ref = evaluations[ref_pos];
    auto run_family =
        [&](const std::string& table_key,
            const std::vector<std::pair<std::string, double>>& hypotheses)
        -> std::set<std::string> {
        if (hypotheses.empty()) return {};
        auto holm = holm_bonferroni(hypotheses, alpha);
        report.significance[table_key] = holm.pairs;
        std::set<std::string> rejected;
        for (const auto& pair : holm.pairs)
            if (pair.rejected) rejected.insert(pair.label);
        return rejected;
    };

    for (bool use_scs : {true, false}) {
        auto member = use_scs ? &SystemScores::scs : &SystemScores::ndcg;

        std::vector<std::pair<std::string, double>> sub_hypotheses;
        auto ref_means = per_query_means(ref.substitution_scores.*member);
        for (const auto& eval : evaluations) {
            if (eval.run.system_name == reference) continue;
            auto sys_means = per_query_means(eval.substitution_scores.*member);
            std::vector<double> va, vb;
            if (!paired_vectors(sys_means, ref_means, va, vb)) continue;
            sub_hypotheses.emplace_back(report.letters[eval.run.system_name],
                                        paired_ttest(va, vb).p);
        }
        const std::string sub_key =
            std::string("substitution/") + (use_scs ? "scs" : "ndcg");
        auto sub_rejected = run_family(sub_key, sub_hypotheses);
        std::string sub_letters;
        for (const auto& letter : sub_rejected) sub_letters += letter;
        for (auto& row : (use_scs ? report.sub_scs : report.sub_ndcg))
            if (row.system == reference) row.sig = sub_letters;

        std::vector<std::pair<std::string, double>> concat_hypotheses;
        for (int rank = 1; rank <= ctx.k; ++rank) {
            auto ref_scores = rank_scores(ref.concat_scores.*member, rank);
            for (const auto& eval : evaluations) {
                if (eval.run.system_name == reference) continue;
                auto sys_scores = rank_scores(eval.concat_scores.*member, rank);
                std::vector<double> va, vb;
                if (!paired_vectors(sys_scores, ref_scores, va, vb)) continue;
                concat_hypotheses.emplace_back(
                    report.letters[eval.run.system_name] + "@" +
                        std::to_string(rank),
                    paired_ttest(va, vb).p);
            }
        }
        const std::string concat_key =
            std::string("concat/") + (use_scs ? "scs" : "ndcg");
        auto concat_rejected = run_family(concat_key, concat_hypotheses);
        for (auto& row : (use_scs ? report.concat_scs : report.concat_ndcg)) {
            if (row.system != reference) continue;
            for (int rank = 1; rank <= ctx.k; ++rank) {
                std::string letters;
                for (const auto& eval : evaluations) {
                    if (eval.run.system_name == reference) continue;
                    const std::string label =
                        report.letters[eval.run.system_name] + "@" +
                        std::to_string(rank);
                    if (concat_rejected.count(label))
                        letters += report.letters[eval.run.system_name];
                }
                row.sig[static_cast<std::size_t>(rank - 1)] = letters;
            }
        }
    }
    return report;
}

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

GeneratedRun generate_run(
    const std::string& name,
    std::span<const std::pair<std::string, std::string>> queries,
    const ExampleSelector& selector, const GenerationConfig& config,
    CompletionBackend& backend, int threads) {
    GeneratedRun out;
    out.run.system_name = name;
    const std::size_t n_queries = queries.size();
    std::vector<RecommendationList> lists(n_queries);
    out.audits.resize(n_queries);
    std::vector<char> failed(n_queries, 0);

    auto one = [&](std::size_t q) {
        if (interrupt_flag().load(std::memory_order_relaxed)) return;
        const auto& [qid, text] = queries[q];
        try {
            auto examples = selector(text);
            auto result = generate(text, examples, config, backend);
            result.recs.query_id = qid;
            lists[q] = std::move(result.recs);
            out.audits[q] = std::move(result.audit);
        } catch (const std::exception& ex) {
            failed[q] = 1;
            lists[q].query_id = qid;
            lists[q].generation_failed = true;
            out.audits[q].query = text;
            out.audits[q].flags.push_back(std::string("backend_error: ") +
                                          ex.what());
        }
    };

    if (threads <= 0) {
        for (std::size_t q = 0; q < n_queries; ++q) one(q);
    } else {
        const std::int64_t total = static_cast<std::int64_t>(n_queries);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::int64_t q = 0; q < total; ++q)
            one(static_cast<std::size_t>(q));
    }
    if (interrupt_flag().load(std::memory_order_relaxed))
        throw Error("interrupted");

    for (std::size_t q = 0; q < n_queries; ++q) {
        if (failed[q]) ++out.backend_errors;
        out.run.per_query[queries[q].first] = std::move(lists[q]);
    }
    return out;
}

SweepReport sweep_examples(std::span<const int> sizes,
                           std::span<const PromptExample> pool,
                           const GenerationConfig& config,
                           CompletionBackend& backend, const EvalContext& ctx) {
    if (sizes.empty()) throw Error("no sweep sizes");
    std::set<int> seen;
    for (int size : sizes) {
        if (size < 1) throw Error("sweep size must be positive");
        if (!seen.insert(size).second) throw Error("duplicate sweep point");
        if (static_cast<std::size_t>(size) > pool.size())
            throw Error("sweep size exceeds example pool: " +
                        std::to_string(size));
    }
    if (ctx.queries.empty()) throw Error("empty query set");

    SweepReport report;
    for (int size : sizes) {
        GenerationConfig sized = config;
        sized.n_examples = size;
        auto generated = generate_run(
            "gqr-n" + std::to_string(size), ctx.queries,
            [&](std::string_view target) {
                return select_examples(pool, size, target);
            },
            sized, backend, ctx.threads);

        auto scores =
            evaluate_system(generated.run, Protocol::Substitution, ctx);
        report.rows.push_back({size, substitution_summary(scores.scs),
                               substitution_summary(scores.ndcg)});
    }
    return report;
}

} // namespace gqr
