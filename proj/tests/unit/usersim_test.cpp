#include "taira/errors.hpp"
#include "taira/usersim.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <map>

using namespace taira;
using namespace taira::testing;
using nlohmann::json;

namespace {

RecommendationResponse response_of(const std::vector<std::vector<std::string>>& lists) {
    RecommendationResponse r;
    for (const auto& ids : lists) {
        RecommendationList l{"list", {}};
        for (const auto& id : ids) l.items.emplace_back(id, world().catalog.at(id).title);
        r.lists.push_back(l);
    }
    return r;
}

std::vector<std::string> ten(int start) {
    std::vector<std::string> out;
    for (int i = start; i < start + 10; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "C%04d", i);
        out.emplace_back(buf);
    }
    return out;
}

QuerySpec spec_for(const std::string& target) {
    QuerySpec q;
    q.query_id = "q0001";
    q.query_text = "Can you recommend some casual blouses?";
    q.user_id = "U001";
    q.target_item_id = target;
    q.scenario_description = std::string(scenario_description(Scenario::DirectReference));
    return q;
}

ScriptRule sim(std::string reply) {
    ScriptRule r;
    r.tag = CallTag::Simulator;
    r.reply = std::move(reply);
    return r;
}

}  // namespace

TEST_CASE("scenario table") {
    const std::map<Scenario, std::pair<double, Difficulty>> expected = {
        {Scenario::DirectReference, {33.2, Difficulty::Easy}}, {Scenario::Occasions, {13.6, Difficulty::Medium}},
        {Scenario::Matching, {11.2, Difficulty::Medium}},      {Scenario::MultiTypes, {9.7, Difficulty::Medium}},
        {Scenario::Bundle, {10.7, Difficulty::Hard}},          {Scenario::Ambiguous, {11.5, Difficulty::Hard}},
        {Scenario::MultiOccasions, {10.1, Difficulty::Hard}}};
    double total = 0;
    for (auto s : kAllScenarios) {
        CHECK(scenario_weight(s) == expected.at(s).first);
        CHECK(difficulty_of(s) == expected.at(s).second);
        CHECK(parse_scenario(scenario_name(s)) == s);
        CHECK_FALSE(scenario_description(s).empty());
        total += scenario_weight(s);
    }
    CHECK(total == doctest::Approx(100.0));
    CHECK_THROWS_AS(parse_scenario("odd"), UsersimError);
}

TEST_CASE("semantic opener table") {
    const std::map<std::string, double> expected = {
        {"Can you recommend", 18.5}, {"I am looking for", 16.6},     {"Do you have any suggestions", 15.5},
        {"Can you help me choose", 14.2}, {"What's the best", 10.5}, {"Show me", 9.2},
        {"I need advice on choosing", 8.9}, {"Where can I find", 6.6}};
    for (auto s : kAllSemantics) {
        CHECK(expected.at(std::string(semantic_phrase(s))) == semantic_weight(s));
        CHECK(parse_semantic(semantic_phrase(s)) == s);
    }
}

TEST_CASE("unit draw is in [0,1) and reproducible") {
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
        double x = unit_draw(a);
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(x == unit_draw(b));
    }
}

TEST_CASE("tiered sampling only returns scenarios of that tier") {
    std::mt19937_64 rng(9);
    std::map<Scenario, int> seen;
    for (int i = 0; i < 3000; ++i) {
        auto s = sample_scenario(rng, Difficulty::Medium);
        CHECK(difficulty_of(s) == Difficulty::Medium);
        ++seen[s];
    }
    // renormalized: occasions 13.6 / 34.5
    CHECK(seen[Scenario::Occasions] / 3000.0 == doctest::Approx(13.6 / 34.5).epsilon(0.1));
}

TEST_CASE("item type and attributes") {
    const Item& it = world().catalog.at("C0001");
    CHECK(item_type(it) == "women's blouse");
    CHECK(item_attributes(it) == std::vector<std::string>{"Casual", "Chiffon", "Striped"});
    Item bare{"x", "t", "d", {"Shoes", "Boots", "Leather"}, {}};
    CHECK(item_type(bare) == "Leather");
    CHECK(item_attributes(bare) == std::vector<std::string>{"Boots"});
}

TEST_CASE("query generation is deterministic and well-formed") {
    const auto& cat = world().catalog;
    DifficultyCounts counts{{Difficulty::Easy, 3}, {Difficulty::Medium, 3}, {Difficulty::Hard, 3}};
    Llm a, b;
    auto s1 = generate_queries(cat, counts, 17, a.client);
    auto s2 = generate_queries(cat, counts, 17, b.client);
    CHECK(s1 == s2);
    REQUIRE(s1.size() == 9);
    std::set<std::string> ids;
    for (const auto& q : s1) {
        CHECK_NOTHROW(q.validate());
        CHECK(difficulty_of(q.scenario) == q.difficulty);
        CHECK(q.query_text.rfind(semantic_phrase(q.semantic), 0) == 0);
        CHECK(cat.at(q.target_item_id).id == q.target_item_id);
        ids.insert(q.query_id);
    }
    CHECK(ids.size() == 9);
    Llm c;
    CHECK_FALSE(generate_queries(cat, counts, 18, c.client) == s1);
    CHECK_THROWS_AS(generate_queries(cat, {{Difficulty::Easy, 0}}, 1, c.client), UsersimError);
    CHECK_THROWS_AS(generate_queries(cat, {{Difficulty::Easy, 500}}, 1, c.client), UsersimError);
}

TEST_CASE("suite files round trip") {
    Llm llm;
    auto suite = generate_queries(world().catalog, {{Difficulty::Hard, 4}}, 3, llm.client);
    auto path = std::filesystem::temp_directory_path() / "taira_suite.jsonl";
    save_suite(path, suite);
    CHECK(load_suite(path) == suite);
    std::filesystem::remove(path);
    QuerySpec bad = suite.front();
    bad.difficulty = Difficulty::Easy;
    CHECK_THROWS_AS(bad.validate(), UsersimError);
}

TEST_CASE("score clamping") {
    CHECK(clamp_score(0.2) == 0.0);
    CHECK(clamp_score(0.25) == 0.0);
    CHECK(clamp_score(0.8) == 1.0);
    CHECK(clamp_score(1.5) == 1.0);
    CHECK(clamp_score(7.0) == 2.0);
    CHECK(clamp_score(-3.0) == 0.0);
    CHECK(clamp_score(std::nan("")) == 0.0);
}

TEST_CASE("judge: clamps, lowers a non-target 2 and logs both") {
    auto resp = response_of({ten(1)});
    json scores = json::array({json::array({2, 2, 0.7, 1, 0, 0, 0, 0, 0, 0})});
    Llm llm(std::make_unique<ScriptedProvider>(
        std::vector<ScriptRule>{sim("Reason: fine\n" + json{{"fail", false}, {"scores", scores}}.dump())}, false));
    auto v = judge(spec_for("C0001"), resp, world().catalog, llm.client);
    CHECK_FALSE(v.failed);
    CHECK(v.score_lists[0][0] == 2.0);
    CHECK(v.score_lists[0][1] == 1.0);
    CHECK(v.score_lists[0][2] == 0.5);
    CHECK(v.adjustments.size() == 2);
}

TEST_CASE("judge: fail zeroes scores; wrong row count and garbage become unparseable") {
    auto resp = response_of({ten(1), ten(13)});
    json two = json::array({json::array({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}), json::array({1, 1, 1, 1, 1, 1, 1, 1, 1, 1})});
    Llm failing(std::make_unique<ScriptedProvider>(
        std::vector<ScriptRule>{sim(json{{"fail", true}, {"scores", two}}.dump())}, false));
    auto v = judge(spec_for("C0001"), resp, world().catalog, failing.client);
    CHECK(v.failed);
    for (const auto& l : v.score_lists)
        for (double s : l) CHECK(s == 0.0);

    json one = json::array({two[0]});
    Llm short_rows(std::make_unique<ScriptedProvider>(
        std::vector<ScriptRule>{sim(json{{"fail", false}, {"scores", one}}.dump())}, false));
    auto u = judge(spec_for("C0001"), resp, world().catalog, short_rows.client);
    CHECK(u.failed);
    CHECK(u.reason == "unparseable");
    CHECK(u.score_lists.size() == 2);

    RecommendationResponse invalid;
    CHECK_THROWS_AS(judge(spec_for("C0001"), invalid, world().catalog, short_rows.client), UsersimError);
}

TEST_CASE("offline simulator rewards relevant lists") {
    auto blouses = response_of({ten(1)});
    Llm llm;
    auto v = judge(spec_for("C0001"), blouses, world().catalog, llm.client);
    CHECK_FALSE(v.failed);
    CHECK(v.score_lists[0][0] == 2.0);
    CHECK(SimVerdict::from_json(v.to_json()) == v);
}

TEST_CASE("list rendering for the judge") {
    auto r = response_of({{"C0001"}});
    CHECK(render_lists_for_judge(r) == "\nList 1 (list): [C0001] " + world().catalog.at("C0001").title);
}
