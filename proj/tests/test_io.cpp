#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gqr/error.hpp"
#include "gqr/io.hpp"

using namespace gqr;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = std::filesystem::temp_directory_path() / name;
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

} // namespace

TEST_CASE("corpus jsonl") {
    TempFile file("gqr_corpus.jsonl",
                  "{\"id\": \"d1\", \"text\": \"alpha beta\"}\n"
                  "\n"
                  "{\"id\": \"d2\", \"text\": \"\"}\n");
    auto docs = read_corpus_jsonl(file.path.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "d1");
    CHECK(docs[1].text.empty());

    SUBCASE("malformed line reports its number") {
        TempFile bad("gqr_corpus_bad.jsonl",
                     "{\"id\": \"d1\", \"text\": \"x\"}\nnot json\n");
        CHECK_THROWS_WITH_AS(read_corpus_jsonl(bad.path.string()),
                             doctest::Contains("line 2"), Error);
    }
    SUBCASE("missing field is an error") {
        TempFile bad("gqr_corpus_bad2.jsonl", "{\"id\": \"d1\"}\n");
        CHECK_THROWS(read_corpus_jsonl(bad.path.string()));
    }
    SUBCASE("missing file is a config error") {
        CHECK_THROWS_AS(read_corpus_jsonl("/nonexistent/corpus.jsonl"),
                        ConfigError);
    }
}

TEST_CASE("queries file with and without ids") {
    TempFile file("gqr_queries.tsv", "q7\tcheap flights\nbare query\n");
    auto queries = read_queries(file.path.string());
    REQUIRE(queries.size() == 2);
    CHECK(queries[0] == std::pair<std::string, std::string>{"q7",
                                                            "cheap flights"});
    CHECK(queries[1].first == "q2");
    CHECK(queries[1].second == "bare query");
}

TEST_CASE("trec qrels parsing") {
    TempFile file("gqr_qrels.txt",
                  "q1 0 d1 1\nq1 0 d2 0\nq2 0 d9 2\n");
    auto qrels = read_qrels(file.path.string());
    CHECK(qrels.grade("q1", "d1") == 1);
    CHECK(qrels.grade("q1", "d2") == 0);
    CHECK(qrels.grade("q2", "d9") == 2);
    CHECK(qrels.grade("q2", "missing") == 0);
    CHECK(qrels.grade("missing", "d1") == 0);

    SUBCASE("short line is an error with its number") {
        TempFile bad("gqr_qrels_bad.txt", "q1 0 d1 1\nq2 0 d2\n");
        CHECK_THROWS_WITH_AS(read_qrels(bad.path.string()),
                             doctest::Contains("line 2"), Error);
    }
    SUBCASE("negative grade rejected") {
        TempFile bad("gqr_qrels_neg.txt", "q1 0 d1 -2\n");
        CHECK_THROWS(read_qrels(bad.path.string()));
    }
}

TEST_CASE("trec run format round trip") {
    std::vector<RankedList> lists{
        {"q1", {{"d3", 2.5}, {"d1", 1.25}}},
        {"q2", {{"d9", 0.75}}},
    };
    auto text = format_trec_run(lists, "gqr");
    CHECK(text ==
          "q1 Q0 d3 1 2.500000 gqr\n"
          "q1 Q0 d1 2 1.250000 gqr\n"
          "q2 Q0 d9 1 0.750000 gqr\n");
    auto parsed = parse_trec_run(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].query_id == "q1");
    CHECK(parsed[0].entries[0].doc_id == "d3");
    CHECK(parsed[0].entries[1].score == doctest::Approx(1.25));
    CHECK(parsed[1].entries.size() == 1);
}

TEST_CASE("prompt pool jsonl") {
    TempFile file("gqr_pool.jsonl",
                  "{\"query\": \"Ryanair\", \"recommendations\": "
                  "[\"Ryanair careers\", \"Ryanair history\"]}\n");
    auto pool = read_prompt_pool(file.path.string());
    REQUIRE(pool.size() == 1);
    CHECK(pool[0].query == "Ryanair");
    CHECK(pool[0].recommendations.size() == 2);

    SUBCASE("items with separators are rejected at load") {
        TempFile bad("gqr_pool_bad.jsonl",
                     "{\"query\": \"q\", \"recommendations\": [\"a, b\"]}\n");
        CHECK_THROWS_WITH_AS(read_prompt_pool(bad.path.string()),
                             doctest::Contains("separator"), Error);
    }
}

TEST_CASE("run cache round trip") {
    std::map<std::string, RecommendationList> runs;
    RecommendationList r1;
    r1.query_id = "q1";
    r1.items = {"a", "b"};
    runs["q1"] = r1;
    RecommendationList r2;
    r2.query_id = "q2";
    r2.generation_failed = true;
    runs["q2"] = r2;

    const auto path =
        (std::filesystem::temp_directory_path() / "gqr_run_cache.jsonl")
            .string();
    write_run_cache(path, runs);
    auto loaded = read_run_cache(path);
    CHECK(loaded.size() == 2);
    CHECK(loaded.at("q1").items == std::vector<std::string>{"a", "b"});
    CHECK(loaded.at("q2").generation_failed);
    CHECK_FALSE(loaded.at("q1").generation_failed);

    // rewrite is byte-identical
    const auto path2 =
        (std::filesystem::temp_directory_path() / "gqr_run_cache2.jsonl")
            .string();
    write_run_cache(path2, loaded);
    CHECK(slurp(path) == slurp(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("audit log serialization") {
    AuditRecord record;
    record.query = "Nutella";
    record.prompt = "query: x\nrecommendations:";
    record.raw_continuation = "a, b";
    record.parsed_items = {"a", "b"};
    record.flags = {};
    const auto path =
        (std::filesystem::temp_directory_path() / "gqr_audit.jsonl").string();
    std::vector<AuditRecord> records{record};
    write_audit_log(path, records);
    auto text = slurp(path);
    CHECK(text.find("\"query\":\"Nutella\"") != std::string::npos);
    CHECK(text.find("\"raw_continuation\":\"a, b\"") != std::string::npos);
    CHECK(text.back() == '\n');
    std::filesystem::remove(path);
}
