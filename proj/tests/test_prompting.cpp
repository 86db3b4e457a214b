#include <doctest.h>

#include <random>

#include "gqr/error.hpp"
#include "gqr/llm.hpp"
#include "gqr/prompting.hpp"
#include "gqr/tokenize.hpp"

using namespace gqr;

TEST_CASE("format_example matches the two-line template") {
    auto example = make_prompt_example(
        "Ryanair", {"Ryanair careers", "Ryanair history"});
    CHECK(format_example(example) ==
          "query: Ryanair\nrecommendations: Ryanair careers, Ryanair history");

    auto single = make_prompt_example("x", {"only one"});
    CHECK(format_example(single) == "query: x\nrecommendations: only one");
}

TEST_CASE("prompt example validation") {
    CHECK_THROWS_WITH(make_prompt_example("q", {"a, b"}),
                      "separator character in item: a, b");
    CHECK_THROWS(make_prompt_example("", {"a"}));
    CHECK_THROWS(make_prompt_example("q", {}));
    CHECK_THROWS(make_prompt_example("q", {""}));
    CHECK_THROWS(make_prompt_example(
        "q", std::vector<std::string>(11, "item")));
}

TEST_CASE("build_prompt layout") {
    std::vector<PromptExample> examples{
        make_prompt_example("Ryanair", {"Ryanair careers", "Ryanair history"}),
        make_prompt_example("New York",
                            {"New York hotels", "New York weather"})};

    auto prompt = build_prompt(examples, "Nutella");
    CHECK(prompt ==
          "query: Ryanair\n"
          "recommendations: Ryanair careers, Ryanair history\n"
          "query: New York\n"
          "recommendations: New York hotels, New York weather\n"
          "query: Nutella\n"
          "recommendations:");

    SUBCASE("one example gives a three-line prompt") {
        std::vector<PromptExample> one{examples[0]};
        auto small = build_prompt(one, "x");
        CHECK(std::count(small.begin(), small.end(), '\n') == 3);
    }
    SUBCASE("always ends with the bare continuation cue") {
        for (const auto& target : {"a", "Nutella", "two words"}) {
            auto p = build_prompt(examples, target);
            REQUIRE(p.size() >= 16);
            CHECK(p.substr(p.size() - 16) == "recommendations:");
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_WITH(build_prompt({}, "x"),
                          "prompt needs at least one example");
        CHECK_THROWS_WITH(build_prompt(examples, "ryanair"),
                          "target collides with example: Ryanair");
        CHECK_THROWS(build_prompt(examples, ""));
    }
}

TEST_CASE("parse_recommendations") {
    SUBCASE("truncates to k") {
        auto recs = parse_recommendations("a, b, c, d, e, f, g", 6, "target");
        CHECK(recs.items ==
              std::vector<std::string>{"a", "b", "c", "d", "e", "f"});
        CHECK_FALSE(recs.generation_failed);
    }
    SUBCASE("case-insensitive dedupe keeps first occurrence") {
        auto recs = parse_recommendations("a, A, b", 6, "target");
        CHECK(recs.items == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("empty continuation is a flagged failure") {
        auto recs = parse_recommendations("", 6, "target");
        CHECK(recs.items.empty());
        CHECK(recs.generation_failed);
    }
    SUBCASE("drops the target and blanks") {
        auto recs = parse_recommendations(" Target , , x ", 6, "target");
        CHECK(recs.items == std::vector<std::string>{"x"});
    }
    SUBCASE("keeps only the first non-blank line") {
        auto recs = parse_recommendations("\n  \na, b\nc, d", 6, "t");
        CHECK(recs.items == std::vector<std::string>{"a", "b"});
    }
}

TEST_CASE("round trip through the template") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> n_items(1, 10);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> items;
        const int count = n_items(rng);
        for (int i = 0; i < count; ++i)
            items.push_back("item " + std::to_string(rng() % 100000) + "x" +
                            std::to_string(i));
        auto example = make_prompt_example("q", items);
        auto formatted = format_example(example);
        auto payload = formatted.substr(formatted.find('\n') + 1);
        REQUIRE(payload.rfind("recommendations: ", 0) == 0);
        payload = payload.substr(17);

        const int k = 1 + static_cast<int>(rng() % 10);
        auto parsed = parse_recommendations(payload, k, "unrelated-target");
        std::vector<std::string> expected = items;
        if (expected.size() > static_cast<std::size_t>(k))
            expected.resize(static_cast<std::size_t>(k));
        CHECK(parsed.items == expected);
    }
}

TEST_CASE("generate composes prompt, backend, and parser") {
    MockBackend backend(7);
    GenerationConfig config;
    std::vector<PromptExample> examples{
        make_prompt_example("Ryanair", {"Ryanair careers"})};

    auto result = generate("Nutella", examples, config, backend);
    CHECK(result.recs.items.size() == 6);
    CHECK(result.recs.query_id == "Nutella");
    CHECK_FALSE(result.recs.generation_failed);
    CHECK(result.audit.prompt ==
          build_prompt(examples, "Nutella"));
    CHECK(result.audit.raw_continuation ==
          backend.complete({build_prompt(examples, "Nutella"), config}).text);
    CHECK(result.audit.parsed_items == result.recs.items);

    SUBCASE("deterministic end to end") {
        auto again = generate("Nutella", examples, config, backend);
        CHECK(again.recs.items == result.recs.items);
    }
    SUBCASE("never returns more than k items nor the target") {
        for (int k : {1, 2, 6}) {
            GenerationConfig small = config;
            small.k = k;
            auto r = generate("Nutella", examples, small, backend);
            CHECK(r.recs.items.size() <= static_cast<std::size_t>(k));
            for (const auto& item : r.recs.items)
                CHECK_FALSE(iequals(item, "Nutella"));
        }
    }
    SUBCASE("flaky backend producing nothing yields a flagged empty list") {
        MockBackend dead(7, true, 0.0);
        auto r = generate("Nutella", examples, config, dead);
        CHECK(r.recs.items.empty());
        CHECK(r.recs.generation_failed);
        CHECK(r.audit.flags ==
              std::vector<std::string>{"generation_failed"});
    }
}

TEST_CASE("select_examples skips collisions") {
    std::vector<PromptExample> pool{
        make_prompt_example("alpha", {"a1"}),
        make_prompt_example("beta", {"b1"}),
        make_prompt_example("gamma", {"c1"}),
    };
    auto picked = select_examples(pool, 2, "BETA");
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].query == "alpha");
    CHECK(picked[1].query == "gamma");

    CHECK(select_examples(pool, 10, "x").size() == 3);
}
