#include "taira/plan.hpp"

#include "taira/errors.hpp"

#include <algorithm>
#include <charconv>

namespace taira {

using nlohmann::json;

namespace {

std::optional<int> task_number(std::string_view key) {
    constexpr std::string_view prefix = "task_";
    if (key.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto digits = key.substr(prefix.size());
    int n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || n <= 0) return std::nullopt;
    return n;
}

json record_to_json(const TaskRecord& r) {
    json j = {{"content", r.content},
              {"agent", agent_wire_name(r.agent)},
              {"input", r.input},
              {"output", r.output},
              {"phase", r.phase}};
    if (!r.item_ids.empty()) j["item_ids"] = r.item_ids;
    if (!r.attributes.empty()) j["attributes"] = r.attributes;
    return j;
}

TaskRecord record_from_json(const json& j) {
    TaskRecord r;
    r.content = j.at("content");
    auto agent = parse_agent(j.at("agent").get<std::string>());
    if (!agent) throw PlanError("unknown agent in trajectory record");
    r.agent = *agent;
    r.input = j.value("input", "");
    r.output = j.value("output", "");
    r.phase = j.value("phase", 0);
    r.item_ids = j.value("item_ids", std::vector<std::string>{});
    r.attributes = j.value("attributes", std::vector<std::string>{});
    return r;
}

}  // namespace

json Plan::to_json() const {
    json tasks = json::object();
    for (const auto& t : sub_tasks) {
        tasks["task_" + std::to_string(t.index)] = {{"content", t.content}, {"agent", agent_wire_name(t.agent)}};
    }
    return {{"phase", phase}, {"user_input", user_input}, {"main_task", main_task}, {"sub_tasks", tasks}};
}

bool plan_json_shape_ok(const json& value) {
    if (!value.is_object()) return false;
    auto main = value.find("main_task");
    if (main == value.end() || !main->is_string()) return false;
    auto subs = value.find("sub_tasks");
    if (subs == value.end() || !subs->is_object()) return false;
    for (const auto& [key, task] : subs->items()) {
        if (!task_number(key)) return false;
        if (!task.is_object()) return false;
        auto c = task.find("content");
        auto a = task.find("agent");
        if (c == task.end() || !c->is_string() || a == task.end() || !a->is_string()) return false;
    }
    return true;
}

PlanCheck check_plan(const json& value, bool hierarchical, int phase) {
    if (!plan_json_shape_ok(value)) return {std::nullopt, "plan JSON does not have the required shape"};
    Plan plan;
    plan.phase = phase;
    plan.user_input = value.value("user_input", "");
    plan.main_task = value.at("main_task");
    for (const auto& [key, task] : value.at("sub_tasks").items()) {
        SubTask st;
        st.index = *task_number(key);
        st.content = task.at("content");
        const std::string wire = task.at("agent");
        auto agent = parse_agent(wire);
        if (!agent || *agent == AgentKind::TaskInterpreter) return {std::nullopt, "unknown agent '" + wire + "'"};
        st.agent = *agent;
        plan.sub_tasks.push_back(std::move(st));
    }
    if (plan.sub_tasks.empty()) return {std::nullopt, "the plan has no sub-tasks"};
    std::sort(plan.sub_tasks.begin(), plan.sub_tasks.end(),
              [](const SubTask& a, const SubTask& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < plan.sub_tasks.size(); ++i) {
        if (plan.sub_tasks[i].index != static_cast<int>(i + 1))
            return {std::nullopt, "sub-task keys must be task_1..task_N without gaps"};
    }
    const auto terminals = std::count_if(plan.sub_tasks.begin(), plan.sub_tasks.end(),
                                         [](const SubTask& t) { return is_terminal_agent(t.agent); });
    if (!hierarchical && std::any_of(plan.sub_tasks.begin(), plan.sub_tasks.end(),
                                     [](const SubTask& t) { return t.agent == AgentKind::Planner; }))
        return {std::nullopt, "PlannerAgent is not available in this configuration"};
    if (terminals == 0) return {std::nullopt, "the last sub-task must be assigned to PlannerAgent or InteractorAgent"};
    if (terminals > 1) return {std::nullopt, "PlannerAgent or InteractorAgent may be used only once"};
    if (!is_terminal_agent(plan.sub_tasks.back().agent))
        return {std::nullopt, "no sub-tasks are allowed after PlannerAgent or InteractorAgent"};
    return {std::move(plan), {}};
}

std::string_view failure_name(FailureReason reason) {
    switch (reason) {
        case FailureReason::IterationThreshold: return "iteration_threshold";
        case FailureReason::MalformedOutput: return "malformed_output";
        case FailureReason::ExecutorFailure: return "executor_failure";
    }
    return "executor_failure";
}

FailureReason parse_failure(std::string_view name) {
    for (auto r : {FailureReason::IterationThreshold, FailureReason::MalformedOutput, FailureReason::ExecutorFailure}) {
        if (failure_name(r) == name) return r;
    }
    throw PlanError("unknown failure reason '" + std::string(name) + "'");
}

std::string_view guidance_name(GuidanceMode mode) {
    switch (mode) {
        case GuidanceMode::Matched: return "matched";
        case GuidanceMode::Novel: return "novel";
        case GuidanceMode::None: return "none";
    }
    return "none";
}

std::string Trajectory::render_route() const {
    std::string out = "User query: " + query + "\n";
    for (const auto& plan : plans) {
        out += "Plan[phase " + std::to_string(plan.phase) + "]: " + plan.main_task + "\n";
    }
    for (const auto& step : react_steps) out += step + "\n";
    out += history.render();
    if (!history.empty() || !react_steps.empty()) {
        out += succeeded() ? "Result: Success" : "Result: Fail";
        if (failure) out += " (" + std::string(failure_name(*failure)) + ")";
        out += "\n";
    }
    return out;
}

json Trajectory::to_json() const {
    json plans_json = json::array();
    for (const auto& p : plans) plans_json.push_back(p.to_json());
    json records = json::array();
    for (const auto& r : history.records()) records.push_back(record_to_json(r));
    return {{"query", query},
            {"strategy", strategy},
            {"scenario", scenario_tag},
            {"guidance", guidance_name(guidance)},
            {"pattern_id", pattern_id},
            {"nearest_ids", nearest_ids},
            {"plans", plans_json},
            {"records", records},
            {"react_steps", react_steps},
            {"reflections", reflections},
            {"attempts", attempts},
            {"failure_reason", failure ? json(failure_name(*failure)) : json(nullptr)},
            {"user_rejected", user_rejected}};
}

Trajectory Trajectory::from_json(const json& value) {
    try {
        Trajectory t;
        t.query = value.at("query");
        t.strategy = value.value("strategy", "");
        t.scenario_tag = value.value("scenario", "");
        const std::string guidance = value.value("guidance", "none");
        t.guidance = guidance == "matched" ? GuidanceMode::Matched
                     : guidance == "novel" ? GuidanceMode::Novel
                                           : GuidanceMode::None;
        t.pattern_id = value.value("pattern_id", "");
        t.nearest_ids = value.value("nearest_ids", std::vector<std::string>{});
        for (const auto& p : value.value("plans", json::array())) {
            auto check = check_plan(p, true, p.value("phase", 0));
            if (!check.plan) throw PlanError("invalid plan snapshot in trajectory: " + check.violation);
            t.plans.push_back(std::move(*check.plan));
        }
        for (const auto& r : value.value("records", json::array())) t.history.append(record_from_json(r));
        t.react_steps = value.value("react_steps", std::vector<std::string>{});
        t.reflections = value.value("reflections", std::vector<std::string>{});
        t.attempts = value.value("attempts", 1);
        if (auto f = value.find("failure_reason"); f != value.end() && f->is_string()) t.failure = parse_failure(f->get<std::string>());
        t.user_rejected = value.value("user_rejected", false);
        return t;
    } catch (const json::exception& e) {
        throw PlanError(std::string("malformed trajectory: ") + e.what());
    }
}

}  // namespace taira
