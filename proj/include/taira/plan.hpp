#pragma once

#include "taira/history.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taira {

enum class SubTaskStatus { Pending, Done, Failed };

struct SubTask {
    int index = 0;  // 1-based, from the task_N key
    std::string content;
    AgentKind agent = AgentKind::Searcher;
    SubTaskStatus status = SubTaskStatus::Pending;
    int attempts = 0;
};

// One phase P_i. Exactly one terminal subtask (Planner or Interactor), last.
struct Plan {
    int phase = 0;
    std::string user_input;
    std::string main_task;
    std::vector<SubTask> sub_tasks;

    const SubTask& terminal() const { return sub_tasks.back(); }
    nlohmann::json to_json() const;
};

struct PlanCheck {
    std::optional<Plan> plan;
    std::string violation;  // empty when plan is set
};

// Structural shape of the plan JSON: {main_task, sub_tasks: {task_N: {content, agent}}}.
bool plan_json_shape_ok(const nlohmann::json& value);

// Applies the last-subtask rule; Planner is only legal when hierarchical.
PlanCheck check_plan(const nlohmann::json& value, bool hierarchical, int phase);

enum class FailureReason { IterationThreshold, MalformedOutput, ExecutorFailure };

std::string_view failure_name(FailureReason reason);
FailureReason parse_failure(std::string_view name);

enum class GuidanceMode { Matched, Novel, None };

std::string_view guidance_name(GuidanceMode mode);

// Everything a session did: plan snapshots per phase, executed records, and
// for ReAct-style strategies the step log.
struct Trajectory {
    std::string query;
    std::string strategy;
    std::string scenario_tag;  // known when the query came from the generator
    GuidanceMode guidance = GuidanceMode::None;
    std::string pattern_id;
    std::vector<std::string> nearest_ids;
    std::vector<Plan> plans;
    TaskHistory history;
    std::vector<std::string> react_steps;
    std::vector<std::string> reflections;
    int attempts = 1;
    std::optional<FailureReason> failure;
    bool user_rejected = false;

    bool succeeded() const { return !failure && !user_rejected; }
    std::size_t phases() const { return plans.size(); }

    // Task-route rendering used as distillation input.
    std::string render_route() const;

    nlohmann::json to_json() const;
    static Trajectory from_json(const nlohmann::json& value);
};

}  // namespace taira
