// Compares the serial reference paths against the OpenMP kernels on
// synthetic data and checks that both produce identical results.
//
//   ./gqr_bench [docs] [queries] [vectors] [threads]

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "gqr/eval.hpp"
#include "gqr/llm.hpp"
#include "gqr/rag.hpp"

using namespace gqr;

namespace {

std::vector<Document> synth_corpus(int n_docs, std::mt19937_64& rng) {
    std::vector<std::string> vocab;
    for (int i = 0; i < 800; ++i) vocab.push_back("term" + std::to_string(i));
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> len(20, 120);

    std::vector<Document> docs;
    docs.reserve(static_cast<std::size_t>(n_docs));
    for (int d = 0; d < n_docs; ++d) {
        std::string text;
        const int n = len(rng);
        for (int t = 0; t < n; ++t) {
            if (t > 0) text += ' ';
            text += vocab[pick(rng)];
        }
        docs.push_back({"d" + std::to_string(d), std::move(text)});
    }
    return docs;
}

std::vector<std::pair<std::string, std::string>> synth_queries(
    int n_queries, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 799);
    std::uniform_int_distribution<int> len(1, 4);
    std::vector<std::pair<std::string, std::string>> queries;
    for (int q = 0; q < n_queries; ++q) {
        std::string text;
        const int n = len(rng);
        for (int t = 0; t < n; ++t) {
            if (t > 0) text += ' ';
            text += "term" + std::to_string(pick(rng));
        }
        queries.emplace_back("q" + std::to_string(q), std::move(text));
    }
    return queries;
}

bool same_rankings(const std::vector<RankedList>& a,
                   const std::vector<RankedList>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].entries.size() != b[i].entries.size()) return false;
        for (std::size_t j = 0; j < a[i].entries.size(); ++j) {
            if (a[i].entries[j].doc_id != b[i].entries[j].doc_id) return false;
            if (a[i].entries[j].score != b[i].entries[j].score) return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    const int n_docs = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int n_queries = argc > 2 ? std::atoi(argv[2]) : 400;
    const int n_vectors = argc > 3 ? std::atoi(argv[3]) : 20000;
    const int threads = argc > 4 ? std::atoi(argv[4]) : omp_get_max_threads();

    std::printf("docs=%d queries=%d vectors=%d threads=%d\n\n", n_docs,
                n_queries, n_vectors, threads);
    std::mt19937_64 rng(7);

    // --- batch BM25 -----------------------------------------------------
    auto docs = synth_corpus(n_docs, rng);
    auto queries = synth_queries(n_queries, rng);
    auto index = build_index(docs);

    double t0 = omp_get_wtime();
    auto serial = bm25_search_many(index, queries, 10, {}, 0);
    double t_serial = omp_get_wtime() - t0;

    t0 = omp_get_wtime();
    auto parallel = bm25_search_many(index, queries, 10, {}, threads);
    double t_parallel = omp_get_wtime() - t0;

    std::printf("bm25_search_many   serial %8.3f ms   omp %8.3f ms   x%.2f   %s\n",
                1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
                same_rankings(serial, parallel) ? "match" : "MISMATCH");

    // --- batch knn --------------------------------------------------------
    SessionLog log;
    for (int s = 0; s < n_vectors / 4; ++s) {
        log.sessions.push_back({});
        for (int i = 0; i < 4; ++i)
            log.sessions.back().push_back("log query " + std::to_string(s) +
                                          " " + std::to_string(i));
    }
    HashingEmbeddingProvider provider;
    auto embedding_index = build_embedding_index(log, provider);

    std::vector<std::vector<float>> probes;
    for (int i = 0; i < 200; ++i)
        probes.push_back(provider.embed("probe query " + std::to_string(i)));

    t0 = omp_get_wtime();
    auto knn_serial = knn_many(embedding_index, probes, 10, 0);
    t_serial = omp_get_wtime() - t0;

    t0 = omp_get_wtime();
    auto knn_parallel = knn_many(embedding_index, probes, 10, threads);
    t_parallel = omp_get_wtime() - t0;

    bool knn_match = knn_serial.size() == knn_parallel.size();
    for (std::size_t i = 0; knn_match && i < knn_serial.size(); ++i)
        for (std::size_t j = 0; knn_match && j < knn_serial[i].size(); ++j)
            knn_match = knn_serial[i][j].query == knn_parallel[i][j].query &&
                        knn_serial[i][j].cosine == knn_parallel[i][j].cosine;

    std::printf("knn_many           serial %8.3f ms   omp %8.3f ms   x%.2f   %s\n",
                1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
                knn_match ? "match" : "MISMATCH");

    // --- protocol evaluation ----------------------------------------------
    MockBackend backend(7);
    GenerationConfig gen;
    std::vector<PromptExample> pool{
        make_prompt_example("ryanair", {"ryanair careers", "ryanair history"}),
        make_prompt_example("new york", {"new york hotels", "new york weather"})};
    auto generated = generate_run(
        "bench", queries,
        [&](std::string_view target) {
            return select_examples(pool, 2, target);
        },
        gen, backend, threads);

    Qrels qrels;
    std::uniform_int_distribution<int> pick_doc(0, n_docs - 1);
    for (const auto& [qid, _] : queries)
        for (int j = 0; j < 5; ++j)
            qrels.grades[qid]["d" + std::to_string(pick_doc(rng))] = 1;

    EvalContext ctx;
    ctx.index = &index;
    ctx.qrels = &qrels;
    ctx.queries = queries;

    ctx.threads = 0;
    t0 = omp_get_wtime();
    auto eval_serial = evaluate_system(generated.run, Protocol::Concat, ctx);
    t_serial = omp_get_wtime() - t0;

    ctx.threads = threads;
    t0 = omp_get_wtime();
    auto eval_parallel = evaluate_system(generated.run, Protocol::Concat, ctx);
    t_parallel = omp_get_wtime() - t0;

    bool eval_match = eval_serial.scs.per_rank == eval_parallel.scs.per_rank &&
                      eval_serial.ndcg.per_rank == eval_parallel.ndcg.per_rank;
    std::printf("evaluate_system    serial %8.3f ms   omp %8.3f ms   x%.2f   %s\n",
                1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
                eval_match ? "match" : "MISMATCH");

    return 0;
}
