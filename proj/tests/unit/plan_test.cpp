#include "taira/errors.hpp"
#include "taira/plan.hpp"

#include <doctest.h>

using namespace taira;
using nlohmann::json;

namespace {

json plan_of(std::initializer_list<std::pair<const char*, const char*>> tasks) {
    json subs = json::object();
    int i = 1;
    for (auto [content, agent] : tasks) subs["task_" + std::to_string(i++)] = {{"content", content}, {"agent", agent}};
    return {{"main_task", "m"}, {"sub_tasks", subs}};
}

}  // namespace

TEST_CASE("well-formed plans pass") {
    auto c = check_plan(plan_of({{"s", "SearcherAgent"}, {"r", "ItemRetrievalAgent"}, {"i", "InteractorAgent"}}), true, 0);
    REQUIRE(c.plan);
    CHECK(c.plan->sub_tasks.size() == 3);
    CHECK(c.plan->terminal().agent == AgentKind::Interactor);
    CHECK(check_plan(plan_of({{"s", "SearcherAgent"}, {"p", "PlannerAgent"}}), true, 1).plan->phase == 1);
}

TEST_CASE("last-subtask rule violations are named") {
    CHECK(check_plan(plan_of({{"s", "SearcherAgent"}}), true, 0).violation.find("last sub-task") != std::string::npos);
    CHECK(check_plan(plan_of({{"i", "InteractorAgent"}, {"s", "SearcherAgent"}}), true, 0).violation.find("no sub-tasks are allowed after") != std::string::npos);
    CHECK(check_plan(plan_of({{"p", "PlannerAgent"}, {"i", "InteractorAgent"}}), true, 0).violation.find("only once") != std::string::npos);
    CHECK(check_plan(plan_of({{"p", "PlannerAgent"}}), false, 0).violation.find("not available") != std::string::npos);
    CHECK(check_plan(plan_of({{"t", "TaskInterpreterAgent"}, {"i", "InteractorAgent"}}), true, 0).violation.find("unknown agent") != std::string::npos);
    CHECK(check_plan(plan_of({{"x", "ChefAgent"}, {"i", "InteractorAgent"}}), true, 0).violation.find("unknown agent") != std::string::npos);
    CHECK_FALSE(check_plan(plan_of({}), true, 0).plan);
}

TEST_CASE("sub-task keys are ordered numerically and must be contiguous") {
    json j = {{"main_task", "m"},
              {"sub_tasks", {{"task_10", {{"content", "i"}, {"agent", "InteractorAgent"}}},
                             {"task_2", {{"content", "s"}, {"agent", "SearcherAgent"}}}}}};
    CHECK(check_plan(j, true, 0).violation.find("without gaps") != std::string::npos);
    json k = {{"main_task", "m"}, {"sub_tasks", {{"step_1", {{"content", "i"}, {"agent", "InteractorAgent"}}}}}};
    CHECK_FALSE(plan_json_shape_ok(k));
    CHECK_FALSE(plan_json_shape_ok(json::array()));
}

TEST_CASE("trajectory json round trip") {
    Trajectory t;
    t.query = "q";
    t.strategy = "taira";
    t.scenario_tag = "ambiguous";
    t.guidance = GuidanceMode::Matched;
    t.pattern_id = "tp-4";
    t.plans.push_back(*check_plan(plan_of({{"s", "SearcherAgent"}, {"p", "PlannerAgent"}}), true, 0).plan);
    t.history.append({"s", AgentKind::Searcher, "in", "Casual", 0, {}, {"Casual"}});
    t.history.append({"r", AgentKind::ItemRetriever, "in", "1. [a] A", 1, {"a"}, {}});
    t.failure = FailureReason::IterationThreshold;
    auto back = Trajectory::from_json(t.to_json());
    CHECK(back.to_json() == t.to_json());
    CHECK(back.render_route() == t.render_route());
    CHECK(t.render_route().find("Result: Fail (iteration_threshold)") != std::string::npos);
    CHECK_THROWS_AS(Trajectory::from_json(json{{"nope", 1}}), PlanError);
    CHECK_THROWS_AS(parse_failure("boom"), PlanError);
}

TEST_CASE("history rendering") {
    TaskHistory h;
    CHECK(h.render() == "none");
    h.append({"find", AgentKind::Searcher, "x", "y", 0, {}, {}});
    CHECK(h.render().find("Task1[SearcherAgent] (phase 0): find") == 0);
    CHECK_FALSE(h.has_retrieval());
    h.append({"get", AgentKind::ItemRetriever, "x", "y", 0, {"C1"}, {}});
    CHECK(h.has_retrieval());
    CHECK(h.contains_item("C1"));
    CHECK(parse_agent("ItemRetrievalAgent") == AgentKind::ItemRetriever);
    CHECK_FALSE(parse_agent("Nobody"));
}
