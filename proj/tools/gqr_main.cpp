#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gqr/config.hpp"
#include "gqr/error.hpp"
#include "gqr/eval.hpp"
#include "gqr/io.hpp"
#include "gqr/report.hpp"

namespace fs = std::filesystem;
using namespace gqr;

namespace {

void handle_sigint(int) { interrupt_flag().store(true); }

std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config) {
    if (config.backend == "mock")
        return std::make_unique<MockBackend>(config.seed, config.mock_flaky,
                                             config.mock_emit_prob);
    return std::make_unique<HttpBackend>(config.http);
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& config) {
    if (config.embedding_provider == "hashing")
        return std::make_unique<HashingEmbeddingProvider>();
    return std::make_unique<HttpEmbeddingProvider>(config.embedding_http);
}

InvertedIndex load_or_build_index(const RunConfig& config) {
    if (!config.index_path.empty() && file_exists(config.index_path))
        return load_index(config.index_path);
    require_file(config.corpus_path, "corpus file");
    auto docs = read_corpus_jsonl(config.corpus_path);
    return build_index(docs, config.tokenizer);
}

struct RagComponents {
    SessionLog log;
    EmbeddingIndex index;
    std::unique_ptr<EmbeddingProvider> provider;
};

RagComponents load_rag(const RunConfig& config) {
    if (config.session_log_path.empty())
        throw ConfigError("rag mode requires a session log (sessions=...)");
    require_file(config.session_log_path, "session log");
    RagComponents rag;
    std::ifstream in(config.session_log_path);
    rag.log = ingest_log(in);
    rag.provider = make_provider(config);
    rag.index = build_embedding_index(rag.log, *rag.provider);
    return rag;
}

std::vector<std::pair<std::string, std::string>> load_query_set(
    const RunConfig& config) {
    require_file(config.queries_path, "queries file");
    auto queries = read_queries(config.queries_path);
    if (queries.empty()) throw Error("empty query set");
    for (const auto& [qid, text] : queries) {
        if (tokenize(text, config.tokenizer).empty())
            throw Error("query " + qid + " has no tokens");
    }
    return queries;
}

int run_index(const RunConfig& config, const std::string& out_path) {
    require_file(config.corpus_path, "corpus file");
    auto docs = read_corpus_jsonl(config.corpus_path);
    auto index = build_index(docs, config.tokenizer);
    save_index(index, out_path);
    std::printf("indexed %lld documents, %lld tokens, %zu terms -> %s\n",
                static_cast<long long>(index.stats.doc_count),
                static_cast<long long>(index.stats.total_tokens),
                index.postings.size(), out_path.c_str());
    return 0;
}

int run_recommend(const RunConfig& config, const std::string& single_query,
                  const std::string& query_file, bool rag,
                  const std::string& out_path, const std::string& audit_path) {
    auto backend = make_backend(config);

    std::optional<RagComponents> rag_parts;
    std::vector<PromptExample> pool;
    if (rag) {
        rag_parts = load_rag(config);
    } else {
        require_file(config.prompt_pool_path, "prompt pool");
        pool = read_prompt_pool(config.prompt_pool_path);
        if (pool.empty()) throw Error("prompt pool is empty");
    }
    ExampleSelector selector = [&](std::string_view target) {
        if (rag_parts)
            return compose_dynamic_examples(target, rag_parts->log,
                                            rag_parts->index,
                                            config.generation.n_examples,
                                            *rag_parts->provider);
        return select_examples(pool, config.generation.n_examples, target);
    };

    std::vector<std::pair<std::string, std::string>> queries;
    if (!single_query.empty()) {
        queries.emplace_back("q1", single_query);
    } else {
        require_file(query_file, "query file");
        queries = read_queries(query_file);
        if (queries.empty()) throw Error("empty query set");
    }

    auto generated = generate_run(rag ? "ra-gqr" : "gqr", queries, selector,
                                  config.generation, *backend, config.workers);
    if (!audit_path.empty()) write_audit_log(audit_path, generated.audits);

    if (!single_query.empty()) {
        const auto& recs = generated.run.per_query.at("q1");
        if (recs.generation_failed) {
            const auto& flags = generated.audits[0].flags;
            std::string reason = flags.empty() ? "generation failed" : flags[0];
            throw Error(reason);
        }
        for (const auto& item : recs.items) std::printf("%s\n", item.c_str());
        return 0;
    }

    std::string jsonl;
    for (const auto& [qid, text] : queries) {
        const auto& recs = generated.run.per_query.at(qid);
        nlohmann::json record{{"query_id", qid},
                              {"query", text},
                              {"items", recs.items},
                              {"generation_failed", recs.generation_failed}};
        jsonl += record.dump() + "\n";
    }
    if (out_path.empty()) {
        std::fputs(jsonl.c_str(), stdout);
    } else {
        spit(out_path, jsonl);
        std::printf("wrote %zu records -> %s\n", queries.size(),
                    out_path.c_str());
    }
    if (generated.backend_errors > 0) {
        std::fprintf(stderr, "error: backend failed on %d of %zu queries\n",
                     generated.backend_errors, queries.size());
        return 1;
    }
    return 0;
}

SystemRun run_from_cache(const std::string& name, const std::string& path,
                         int k) {
    SystemRun run;
    run.system_name = name;
    run.per_query = read_run_cache(path);
    for (auto& [_, recs] : run.per_query) {
        if (recs.items.size() > static_cast<std::size_t>(k))
            recs.items.resize(static_cast<std::size_t>(k));
    }
    return run;
}

int run_evaluate(const RunConfig& config,
                 const std::vector<std::string>& live_systems,
                 const std::vector<std::string>& run_specs,
                 std::string reference, const std::string& out_dir) {
    auto queries = load_query_set(config);
    require_file(config.qrels_path, "qrels file");
    auto qrels = read_qrels(config.qrels_path);
    auto index = load_or_build_index(config);

    EvalContext ctx;
    ctx.index = &index;
    ctx.qrels = &qrels;
    ctx.queries = queries;
    ctx.bm25 = config.bm25;
    ctx.k = config.generation.k;
    ctx.threads = config.workers;

    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "runs");

    std::vector<SystemRun> runs;
    int worst_errors = 0;

    for (const auto& spec : run_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--run expects NAME=PATH, got: " + spec);
        const std::string name = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);
        require_file(path, "run file for " + name);
        runs.push_back(run_from_cache(name, path, ctx.k));
    }

    std::unique_ptr<CompletionBackend> backend;
    std::vector<PromptExample> pool;
    std::optional<RagComponents> rag_parts;
    for (const auto& name : live_systems) {
        if (name != "gqr" && name != "ra-gqr")
            throw ConfigError("unknown live system (expected gqr or ra-gqr): " +
                              name);
        if (!backend) backend = make_backend(config);

        const fs::path cache_path = fs::path(out_dir) / "runs" / (name + ".jsonl");
        std::map<std::string, RecommendationList> cached;
        if (file_exists(cache_path.string()))
            cached = read_run_cache(cache_path.string());

        std::vector<std::pair<std::string, std::string>> missing;
        for (const auto& q : queries)
            if (!cached.count(q.first)) missing.push_back(q);

        if (!missing.empty()) {
            ExampleSelector selector;
            if (name == "gqr") {
                if (pool.empty()) {
                    require_file(config.prompt_pool_path, "prompt pool");
                    pool = read_prompt_pool(config.prompt_pool_path);
                    if (pool.empty()) throw Error("prompt pool is empty");
                }
                selector = [&](std::string_view target) {
                    return select_examples(pool, config.generation.n_examples,
                                           target);
                };
            } else {
                if (!rag_parts) rag_parts = load_rag(config);
                selector = [&](std::string_view target) {
                    return compose_dynamic_examples(
                        target, rag_parts->log, rag_parts->index,
                        config.generation.n_examples, *rag_parts->provider);
                };
            }
            auto generated = generate_run(name, missing, selector,
                                          config.generation, *backend,
                                          config.workers);
            worst_errors = std::max(worst_errors, generated.backend_errors);
            write_audit_log((fs::path(out_dir) / ("audit-" + name + ".jsonl")).string(),
                            generated.audits);
            for (auto& [qid, recs] : generated.run.per_query)
                cached[qid] = std::move(recs);
        }
        write_run_cache(cache_path.string(), cached);

        SystemRun run;
        run.system_name = name;
        run.per_query = std::move(cached);
        runs.push_back(std::move(run));
    }

    if (runs.empty())
        throw ConfigError("nothing to evaluate: pass --live and/or --run");
    if (reference.empty()) reference = runs.back().system_name;

    std::vector<SystemEvaluation> evaluations;
    for (auto& run : runs) {
        SystemEvaluation eval;
        eval.substitution_scores =
            evaluate_system(run, Protocol::Substitution, ctx);
        eval.concat_scores = evaluate_system(run, Protocol::Concat, ctx);
        eval.coverage_stats = coverage(run, queries, ctx.k);
        eval.run = std::move(run);
        evaluations.push_back(std::move(eval));
    }

    auto report = build_report(evaluations, reference, config.alpha, ctx);
    spit((fs::path(out_dir) / "report.md").string(), render_markdown(report));
    spit((fs::path(out_dir) / "report.csv").string(), render_csv(report));
    spit((fs::path(out_dir) / "report.json").string(), report_to_json(report));

    // Baseline retrieval run of the original queries, TREC format.
    auto baseline = bm25_search_many(index, queries, ctx.ndcg_cutoff, ctx.bm25,
                                     ctx.threads);
    spit((fs::path(out_dir) / "baseline.run").string(),
         format_trec_run(baseline, "original"));

    std::printf("report written: %s\n",
                (fs::path(out_dir) / "report.md").string().c_str());

    const double error_pct =
        100.0 * worst_errors / static_cast<double>(queries.size());
    if (error_pct > 10.0) {
        std::fprintf(stderr,
                     "error: a system failed on %.1f%% of queries (limit 10%%)\n",
                     error_pct);
        return 1;
    }
    return 0;
}

int run_sweep(const RunConfig& config, const std::vector<int>& sizes,
              const std::string& out_dir) {
    auto queries = load_query_set(config);
    require_file(config.qrels_path, "qrels file");
    auto qrels = read_qrels(config.qrels_path);
    auto index = load_or_build_index(config);
    require_file(config.prompt_pool_path, "prompt pool");
    auto pool = read_prompt_pool(config.prompt_pool_path);

    EvalContext ctx;
    ctx.index = &index;
    ctx.qrels = &qrels;
    ctx.queries = queries;
    ctx.bm25 = config.bm25;
    ctx.k = config.generation.k;
    ctx.threads = config.workers;

    auto backend = make_backend(config);
    auto report = sweep_examples(sizes, pool, config.generation, *backend, ctx);

    fs::create_directories(out_dir);
    spit((fs::path(out_dir) / "sweep.md").string(),
         render_sweep_markdown(report));
    spit((fs::path(out_dir) / "sweep.csv").string(), render_sweep_csv(report));
    std::fputs(render_sweep_markdown(report).c_str(), stdout);
    return 0;
}

int run_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    auto report = report_from_json(slurp(in_path));
    std::string rendered;
    if (format == "markdown") rendered = render_markdown(report);
    else if (format == "csv") rendered = render_csv(report);
    else throw ConfigError("unknown format (expected markdown or csv): " + format);
    if (out_path.empty()) std::fputs(rendered.c_str(), stdout);
    else spit(out_path, rendered);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_sigint);

    CLI::App app{"gqr - generative query recommendation and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig config;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0, k_flag = 0, n_examples_flag = 0;
    std::string backend_flag;
    double alpha_flag = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
        cmd->add_option("--seed", seed_flag, "seed for all offline randomness");
        cmd->add_option("--workers", workers_flag, "worker pool size");
        cmd->add_option("--backend", backend_flag, "mock or http");
        cmd->add_option("--k", k_flag, "recommendations per query");
        cmd->add_option("--n-examples", n_examples_flag, "prompt examples");
        cmd->add_option("--alpha", alpha_flag, "significance level");
    };

    auto* index_cmd = app.add_subcommand("index", "build and persist the inverted index");
    std::string corpus_flag, index_out = "index.bin";
    add_common(index_cmd);
    index_cmd->add_option("--corpus", corpus_flag, "corpus JSONL file");
    index_cmd->add_option("--out", index_out, "output index file");

    auto* rec_cmd = app.add_subcommand("recommend", "generate query recommendations");
    std::string query_flag, query_file_flag, rec_out, audit_flag;
    bool rag_flag = false;
    add_common(rec_cmd);
    rec_cmd->add_option("--query", query_flag, "single query text");
    rec_cmd->add_option("--queries", query_file_flag, "query file (qid<TAB>text)");
    rec_cmd->add_flag("--rag", rag_flag, "retrieval-augmented prompt composition");
    rec_cmd->add_option("--out", rec_out, "output JSONL (default stdout)");
    rec_cmd->add_option("--audit", audit_flag, "audit log JSONL path");

    auto* eval_cmd = app.add_subcommand("evaluate", "run the evaluation protocols");
    std::vector<std::string> live_flags, run_flags;
    std::string reference_flag, eval_out = "eval-out";
    add_common(eval_cmd);
    eval_cmd->add_option("--live", live_flags, "live system: gqr or ra-gqr");
    eval_cmd->add_option("--run", run_flags, "precomputed run: NAME=PATH");
    eval_cmd->add_option("--reference", reference_flag,
                         "reference system for significance letters");
    eval_cmd->add_option("--out-dir", eval_out, "report output directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "prompt-size study");
    std::vector<int> sizes_flag;
    std::string sweep_out = "sweep-out";
    add_common(sweep_cmd);
    sweep_cmd->add_option("--sizes", sizes_flag, "prompt sizes, e.g. --sizes 1 2 5 10")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out-dir", sweep_out, "sweep output directory");

    auto* report_cmd = app.add_subcommand("report", "re-render a report.json");
    std::string report_in, report_format = "markdown", report_out;
    report_cmd->add_option("--in", report_in, "report.json path")->required();
    report_cmd->add_option("--format", report_format, "markdown or csv");
    report_cmd->add_option("--out", report_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) config.apply_file(config_path);
        // precedence: flags > file > defaults
        for (auto* cmd : {index_cmd, rec_cmd, eval_cmd, sweep_cmd}) {
            if (!cmd->parsed()) continue;
            if (cmd->count("--seed")) config.seed = seed_flag;
            if (cmd->count("--workers")) config.workers = workers_flag;
            if (cmd->count("--backend")) config.backend = backend_flag;
            if (cmd->count("--k")) config.generation.k = k_flag;
            if (cmd->count("--n-examples"))
                config.generation.n_examples = n_examples_flag;
            if (cmd->count("--alpha")) config.alpha = alpha_flag;
        }
        if (index_cmd->parsed() && index_cmd->count("--corpus"))
            config.corpus_path = corpus_flag;
        config.validate();

        if (index_cmd->parsed()) return run_index(config, index_out);
        if (rec_cmd->parsed()) {
            if (query_flag.empty() == query_file_flag.empty())
                throw ConfigError("pass exactly one of --query or --queries");
            return run_recommend(config, query_flag, query_file_flag, rag_flag,
                                 rec_out, audit_flag);
        }
        if (eval_cmd->parsed())
            return run_evaluate(config, live_flags, run_flags, reference_flag,
                                eval_out);
        if (sweep_cmd->parsed()) return run_sweep(config, sizes_flag, sweep_out);
        if (report_cmd->parsed())
            return run_report(report_in, report_format, report_out);
    } catch (const ConfigError& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        if (interrupt_flag().load()) return 130;
        return 1;
    }
    return 0;
}
