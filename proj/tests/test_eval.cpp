#include <doctest.h>

#include <random>
#include <set>

#include "gqr/error.hpp"
#include "gqr/eval.hpp"
#include "gqr/report.hpp"
#include "oracles.hpp"

using namespace gqr;

namespace {

RecommendationList recs_of(std::vector<std::string> items) {
    RecommendationList recs;
    recs.items = std::move(items);
    return recs;
}

struct Fixture {
    std::vector<Document> docs;
    InvertedIndex index;
    Qrels qrels;
    std::vector<std::pair<std::string, std::string>> queries;

    Fixture() {
        docs = {{"d1", "apple pie recipe baking"},
                {"d2", "apple orchard tour"},
                {"d3", "pie crust butter baking"},
                {"d4", "orchard apples harvest"},
                {"d5", "butter cookie recipe"}};
        index = build_index(docs);
        qrels.grades["q1"] = {{"d1", 1}, {"d3", 1}};
        qrels.grades["q2"] = {{"d2", 1}, {"d4", 1}};
        queries = {{"q1", "apple pie"}, {"q2", "orchard"}};
    }

    EvalContext ctx() {
        EvalContext c;
        c.index = &index;
        c.qrels = &qrels;
        c.queries = queries;
        c.k = 3;
        return c;
    }
};

} // namespace

TEST_CASE("substitution and concat protocol strings") {
    auto recs = recs_of({"a", "b", "c"});
    CHECK(substitution("x", recs, 2) == "b");
    CHECK(substitution("x", recs, 1) == "a");
    CHECK_THROWS_WITH(substitution("x", recs_of({"a"}), 2), "missing rank");

    CHECK(concat("x", recs_of({"a", "b"}), 1) == "x a");
    CHECK(concat("x", recs_of({"a", "b"}), 2) == "x a b");
    CHECK_THROWS_WITH(concat("x", recs_of({"a"}), 2), "missing rank");
}

TEST_CASE("protocol identities over random inputs") {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> n_items(1, 6);
    for (int round = 0; round < 1000; ++round) {
        std::vector<std::string> items;
        const int count = n_items(rng);
        for (int i = 0; i < count; ++i)
            items.push_back("item" + std::to_string(rng() % 1000));
        auto recs = recs_of(items);
        const std::string query = "query" + std::to_string(rng() % 1000);

        for (int i = 1; i <= count; ++i) {
            CHECK(substitution(query, recs, i) ==
                  recs.items[static_cast<std::size_t>(i - 1)]);
            if (i < count) {
                const auto shorter = concat(query, recs, i);
                const auto longer = concat(query, recs, i + 1);
                REQUIRE(longer.size() > shorter.size());
                CHECK(longer.substr(0, shorter.size()) == shorter);
                CHECK(longer[shorter.size()] == ' ');
            }
        }
    }
}

TEST_CASE("substitution at rank i depends only on items[i]") {
    auto a = recs_of({"alpha", "beta", "gamma"});
    auto b = recs_of({"CHANGED", "beta", "OTHER"});
    CHECK(substitution("q", a, 2) == substitution("q", b, 2));
}

TEST_CASE("evaluate_system identity recommendation equals the baseline") {
    Fixture f;
    auto ctx = f.ctx();

    SystemRun identity;
    identity.system_name = "identity";
    for (const auto& [qid, text] : f.queries)
        identity.per_query[qid] =
            recs_of({text, text, text}); // run files may repeat the query

    auto scores = evaluate_system(identity, Protocol::Substitution, ctx);
    for (int rank = 0; rank < ctx.k; ++rank) {
        REQUIRE(scores.scs.per_rank[rank].size() == f.queries.size());
        for (std::size_t q = 0; q < f.queries.size(); ++q) {
            const double direct =
                scs(f.queries[q].second, f.index.stats).value;
            CHECK(scores.scs.per_rank[rank][q].second ==
                  doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate_system substitution drops missing ranks, concat extends") {
    Fixture f;
    auto ctx = f.ctx();

    SystemRun partial;
    partial.system_name = "partial";
    partial.per_query["q1"] = recs_of({"apple", "pie"});
    // q2 entirely missing

    auto sub = evaluate_system(partial, Protocol::Substitution, ctx);
    CHECK(sub.scs.per_rank[0].size() == 1); // only q1 has rank 1
    CHECK(sub.scs.per_rank[1].size() == 1);
    CHECK(sub.scs.per_rank[2].empty());    // q1 has no rank 3

    auto con = evaluate_system(partial, Protocol::Concat, ctx);
    for (int rank = 0; rank < ctx.k; ++rank) {
        // every query present at every rank via the longest prefix rule
        CHECK(con.scs.per_rank[rank].size() == f.queries.size());
    }
    // q2 falls back to the bare query at every rank
    const double q2_scs = scs("orchard", f.index.stats).value;
    for (int rank = 0; rank < ctx.k; ++rank)
        CHECK(con.scs.per_rank[rank][1].second ==
              doctest::Approx(q2_scs).epsilon(1e-12));

    SUBCASE("empty query set is an error") {
        EvalContext empty = ctx;
        empty.queries = {};
        CHECK_THROWS_WITH(evaluate_system(partial, Protocol::Concat, empty),
                          "empty query set");
    }
}

TEST_CASE("evaluate_system end-to-end against a hand recomputation") {
    Fixture f;
    auto ctx = f.ctx();

    SystemRun run;
    run.system_name = "sys";
    run.per_query["q1"] = recs_of({"baking recipe", "orchard"});
    run.per_query["q2"] = recs_of({"apples harvest"});

    auto sub = evaluate_system(run, Protocol::Substitution, ctx);
    auto con = evaluate_system(run, Protocol::Concat, ctx);

    std::vector<std::vector<std::string>> doc_tokens;
    std::vector<std::pair<std::string, std::vector<std::string>>> oracle_docs;
    for (const auto& doc : f.docs) {
        doc_tokens.push_back(tokenize(doc.text));
        oracle_docs.emplace_back(doc.id, tokenize(doc.text));
    }

    auto expected_cell = [&](const std::string& qid, const std::string& text) {
        const double scs_val = oracles::scs_direct(tokenize(text), doc_tokens);
        auto ranked = oracles::bm25_direct(oracle_docs, tokenize(text), 1.2,
                                           0.75, 10);
        std::vector<int> grades;
        std::vector<int> judged;
        for (const auto& entry : ranked)
            grades.push_back(f.qrels.grade(qid, entry.id));
        for (const auto& [_, g] : f.qrels.grades.at(qid)) judged.push_back(g);
        return std::pair<double, double>(
            scs_val, oracles::ndcg_permutation(grades, judged, 10));
    };

    {
        auto [e_scs, e_ndcg] = expected_cell("q1", "baking recipe");
        CHECK(sub.scs.per_rank[0][0].second ==
              doctest::Approx(e_scs).epsilon(1e-9));
        CHECK(sub.ndcg.per_rank[0][0].second ==
              doctest::Approx(e_ndcg).epsilon(1e-9));
    }
    {
        auto [e_scs, e_ndcg] =
            expected_cell("q1", "apple pie baking recipe orchard");
        CHECK(con.scs.per_rank[1][0].second ==
              doctest::Approx(e_scs).epsilon(1e-9));
        CHECK(con.ndcg.per_rank[1][0].second ==
              doctest::Approx(e_ndcg).epsilon(1e-9));
    }
    {
        auto [e_scs, e_ndcg] = expected_cell("q2", "apples harvest");
        CHECK(sub.scs.per_rank[0][1].second ==
              doctest::Approx(e_scs).epsilon(1e-9));
        CHECK(sub.ndcg.per_rank[0][1].second ==
              doctest::Approx(e_ndcg).epsilon(1e-9));
    }
}

TEST_CASE("evaluate_system parallel path matches serial path") {
    Fixture f;
    auto ctx = f.ctx();
    SystemRun run;
    run.system_name = "sys";
    run.per_query["q1"] = recs_of({"baking recipe", "orchard", "butter"});
    run.per_query["q2"] = recs_of({"apples harvest", "cookie"});

    for (Protocol protocol : {Protocol::Substitution, Protocol::Concat}) {
        ctx.threads = 0;
        auto serial = evaluate_system(run, protocol, ctx);
        ctx.threads = 4;
        auto parallel = evaluate_system(run, protocol, ctx);
        CHECK(serial.scs.per_rank == parallel.scs.per_rank);
        CHECK(serial.ndcg.per_rank == parallel.ndcg.per_rank);
    }
}

TEST_CASE("coverage statistics") {
    std::vector<std::pair<std::string, std::string>> queries{
        {"q1", "a"}, {"q2", "b"}, {"q3", "c"}, {"q4", "d"}};
    SystemRun run;
    run.system_name = "sys";

    SUBCASE("all six everywhere") {
        for (const auto& [qid, _] : queries)
            run.per_query[qid] =
                recs_of({"r1", "r2", "r3", "r4", "r5", "r6"});
        auto stats = coverage(run, queries, 6);
        CHECK(stats.pct_at_least_one == doctest::Approx(100.0));
        CHECK(stats.pct_all_k == doctest::Approx(100.0));
        CHECK(stats.avg_count == doctest::Approx(6.0));
    }
    SUBCASE("nothing anywhere") {
        auto stats = coverage(run, queries, 6);
        CHECK(stats.pct_at_least_one == doctest::Approx(0.0));
        CHECK(stats.pct_all_k == doctest::Approx(0.0));
        CHECK(stats.avg_count == doctest::Approx(0.0));
    }
    SUBCASE("hand-counted mixed case") {
        run.per_query["q1"] = recs_of({"a1", "a2", "a3", "a4", "a5", "a6"});
        run.per_query["q2"] = recs_of({"b1", "b2", "b3", "b4", "b5", "b6"});
        run.per_query["q3"] = recs_of({"c1"});
        run.per_query["q4"] = recs_of({"d1"});
        auto stats = coverage(run, queries, 6);
        CHECK(stats.pct_at_least_one == doctest::Approx(100.0));
        CHECK(stats.pct_all_k == doctest::Approx(50.0));
        CHECK(stats.avg_count == doctest::Approx(3.5));
    }
    SUBCASE("ordering invariant") {
        std::mt19937_64 rng(8);
        for (int round = 0; round < 100; ++round) {
            SystemRun random_run;
            random_run.system_name = "r";
            for (const auto& [qid, _] : queries) {
                const int count = static_cast<int>(rng() % 7);
                std::vector<std::string> items;
                for (int i = 0; i < count; ++i)
                    items.push_back("i" + std::to_string(i));
                if (!items.empty())
                    random_run.per_query[qid] = recs_of(items);
            }
            auto stats = coverage(random_run, queries, 6);
            CHECK(stats.pct_all_k <= stats.pct_at_least_one);
            CHECK(stats.avg_count <= 6.0);
        }
    }
    SUBCASE("empty query set is an error") {
        CHECK_THROWS(coverage(run, {}, 6));
    }
}

TEST_CASE("substitution summary aggregates the per-rank means") {
    ProtocolScores scores;
    scores.k = 3;
    scores.per_rank = {{{"q1", 1.0}, {"q2", 3.0}},  // mean 2.0
                       {{"q1", 4.0}},               // mean 4.0
                       {{"q2", 0.0}}};              // mean 0.0
    auto summary = substitution_summary(scores);
    CHECK(summary.min == doctest::Approx(0.0));
    CHECK(summary.max == doctest::Approx(4.0));
    CHECK(summary.avg == doctest::Approx(2.0));

    auto means = per_query_means(scores);
    CHECK(means.at("q1") == doctest::Approx(2.5));
    CHECK(means.at("q2") == doctest::Approx(1.5));
}

TEST_CASE("report letters correspond to holm rejections") {
    Fixture f;
    auto ctx = f.ctx();

    // strong system: the relevant docs' own words; weak system: noise
    SystemRun strong, weak;
    strong.system_name = "strong";
    weak.system_name = "weak";
    strong.per_query["q1"] = recs_of({"apple pie recipe", "pie crust baking"});
    strong.per_query["q2"] = recs_of({"apple orchard", "orchard harvest"});
    weak.per_query["q1"] = recs_of({"zzz", "yyy"});
    weak.per_query["q2"] = recs_of({"xxx", "www"});

    std::vector<SystemEvaluation> evaluations;
    for (auto* run : {&weak, &strong}) {
        SystemEvaluation eval;
        eval.run = *run;
        eval.substitution_scores =
            evaluate_system(*run, Protocol::Substitution, ctx);
        eval.concat_scores = evaluate_system(*run, Protocol::Concat, ctx);
        eval.coverage_stats = coverage(*run, f.queries, ctx.k);
        evaluations.push_back(std::move(eval));
    }

    auto report = build_report(evaluations, "strong", 0.05, ctx);
    CHECK(report.letters.at("weak") == "a");
    CHECK(report.reference == "strong");

    // every letter shown on the reference row must be a holm rejection
    for (const auto& key : {"substitution/scs", "substitution/ndcg"}) {
        if (!report.significance.count(key)) continue;
        std::set<std::string> rejected;
        for (const auto& pair : report.significance.at(key))
            if (pair.rejected) rejected.insert(pair.label);
        const auto& rows =
            std::string(key) == "substitution/scs" ? report.sub_scs
                                                   : report.sub_ndcg;
        for (const auto& row : rows) {
            if (row.system != "strong") continue;
            for (char letter : row.sig)
                CHECK(rejected.count(std::string(1, letter)) == 1);
            for (const auto& label : rejected)
                CHECK(row.sig.find(label) != std::string::npos);
        }
    }

    SUBCASE("baseline row is constant across ranks") {
        for (double v : report.baseline_concat_scs.means)
            CHECK(v == doctest::Approx(report.baseline_concat_scs.means[0]));
        CHECK(report.baseline_sub_scs.summary.std == 0.0);
        CHECK(report.baseline_sub_scs.summary.min ==
              report.baseline_sub_scs.summary.max);
    }
    SUBCASE("markdown and csv render deterministically") {
        CHECK(render_markdown(report) == render_markdown(report));
        CHECK(render_csv(report) == render_csv(report));
        auto json_text = report_to_json(report);
        auto round_trip = report_from_json(json_text);
        CHECK(report_to_json(round_trip) == json_text);
        CHECK(render_markdown(round_trip) == render_markdown(report));
        CHECK(render_csv(round_trip) == render_csv(report));
    }
    SUBCASE("unknown reference is an error") {
        CHECK_THROWS(build_report(evaluations, "nope", 0.05, ctx));
    }
}

TEST_CASE("sweep_examples") {
    Fixture f;
    auto ctx = f.ctx();
    MockBackend backend(7);
    GenerationConfig config;
    config.k = 3;

    std::vector<PromptExample> pool{
        make_prompt_example("ryanair", {"ryanair careers"}),
        make_prompt_example("new york", {"new york hotels"}),
        make_prompt_example("tesla", {"tesla stock"}),
        make_prompt_example("python", {"python tutorial"}),
    };

    SUBCASE("one row per size, deterministic across reruns") {
        std::vector<int> sizes{1, 2, 4};
        auto first = sweep_examples(sizes, pool, config, backend, ctx);
        REQUIRE(first.rows.size() == 3);
        CHECK(first.rows[0].size == 1);
        CHECK(first.rows[2].size == 4);
        auto second = sweep_examples(sizes, pool, config, backend, ctx);
        CHECK(render_sweep_csv(first) == render_sweep_csv(second));
    }
    SUBCASE("single size equals a direct evaluation") {
        std::vector<int> sizes{2};
        auto sweep = sweep_examples(sizes, pool, config, backend, ctx);

        GenerationConfig sized = config;
        sized.n_examples = 2;
        auto generated = generate_run(
            "manual", ctx.queries,
            [&](std::string_view target) {
                return select_examples(pool, 2, target);
            },
            sized, backend, 0);
        auto scores =
            evaluate_system(generated.run, Protocol::Substitution, ctx);
        auto summary = substitution_summary(scores.scs);
        CHECK(sweep.rows[0].scs.avg == doctest::Approx(summary.avg));
        CHECK(sweep.rows[0].scs.std == doctest::Approx(summary.std));
    }
    SUBCASE("duplicate sizes are rejected") {
        std::vector<int> sizes{2, 2};
        CHECK_THROWS_WITH(sweep_examples(sizes, pool, config, backend, ctx),
                          "duplicate sweep point");
    }
    SUBCASE("size exceeding the pool is rejected") {
        std::vector<int> sizes{5};
        CHECK_THROWS(sweep_examples(sizes, pool, config, backend, ctx));
    }
}

TEST_CASE("generate_run records failures without aborting") {
    Fixture f;
    MockBackend flaky(3, true, 0.0); // never emits items
    GenerationConfig config;
    auto generated = generate_run(
        "flaky", f.queries,
        [&](std::string_view) {
            return std::vector<PromptExample>{
                make_prompt_example("seed", {"seed query"})};
        },
        config, flaky, 2);
    CHECK(generated.backend_errors == 0); // empty generations are not errors
    for (const auto& [_, recs] : generated.run.per_query) {
        CHECK(recs.items.empty());
        CHECK(recs.generation_failed);
    }
    CHECK(generated.audits.size() == f.queries.size());
    CHECK(generated.audits[0].query == f.queries[0].second);
}
