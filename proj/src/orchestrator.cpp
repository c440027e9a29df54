#include "taira/orchestrator.hpp"

#include "taira/errors.hpp"
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace taira {

using nlohmann::json;

std::string_view strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Taira: return "TAIRA";
        case StrategyKind::TairaNoT: return "TAIRA_noT";
        case StrategyKind::TairaNoH: return "TAIRA_noH";
        case StrategyKind::PlanAndSolve: return "PlanAndSolve";
        case StrategyKind::ReAct: return "ReAct";
        case StrategyKind::Reflexion: return "Reflexion";
        case StrategyKind::ZeroShot: return "ZeroShot";
    }
    return "TAIRA";
}

PlannerStrategy PlannerStrategy::of(StrategyKind kind) {
    PlannerStrategy s;
    s.kind = kind;
    switch (kind) {
        case StrategyKind::Taira: break;
        case StrategyKind::TairaNoT: s.use_patterns = false; break;
        case StrategyKind::TairaNoH: s.hierarchical = false; break;
        case StrategyKind::PlanAndSolve:
        case StrategyKind::ReAct:
        case StrategyKind::Reflexion:
        case StrategyKind::ZeroShot:
            s.use_patterns = false;
            s.hierarchical = false;
            break;
    }
    return s;
}

PlannerStrategy PlannerStrategy::parse(std::string_view name) {
    const std::string n = text::to_lower(name);
    if (n == "taira") return of(StrategyKind::Taira);
    if (n == "taira-not" || n == "taira_not") return of(StrategyKind::TairaNoT);
    if (n == "taira-noh" || n == "taira_noh") return of(StrategyKind::TairaNoH);
    if (n == "plan-solve" || n == "planandsolve" || n == "plan-and-solve") return of(StrategyKind::PlanAndSolve);
    if (n == "react") return of(StrategyKind::ReAct);
    if (n == "reflexion") return of(StrategyKind::Reflexion);
    if (n == "zero-shot" || n == "zeroshot") return of(StrategyKind::ZeroShot);
    throw PlanError("unknown strategy '" + std::string(name) + "'");
}

PlannerStrategy PlannerStrategy::with_ablations(const std::set<char>& ablations) const {
    PlannerStrategy s = *this;
    if (ablations.count('T')) s.use_patterns = false;
    if (ablations.count('H')) s.hierarchical = false;
    if (s.kind == StrategyKind::Taira) {
        if (!s.use_patterns && s.hierarchical) s.kind = StrategyKind::TairaNoT;
        if (s.use_patterns && !s.hierarchical) s.kind = StrategyKind::TairaNoH;
    }
    return s;
}

std::string PlannerStrategy::name() const {
    std::string n(strategy_name(kind));
    if (kind == StrategyKind::Taira && !use_patterns && !hierarchical) n += "_noT_noH";
    return n;
}

std::string guidance_for(const MatchResult& match, const PatternStore& store) {
    if (match.matched()) {
        auto p = store.get(match.pattern_id);
        if (!p) throw PatternError("matched pattern '" + match.pattern_id + "' is not in the store");
        return prompts::matched_guidance(p->solution_description, p->thought_template);
    }
    std::vector<std::string> solutions;
    for (const auto& id : match.nearest_ids) {
        if (auto p = store.get(id)) solutions.push_back(p->solution_description);
    }
    return prompts::novel_guidance(solutions);
}

namespace {

prompts::PlanPromptOptions prompt_options(const PlanningOptions& o) {
    return {o.hierarchical, o.plan_and_solve, o.guidance};
}

// JSON shape through complete_json, then the last-subtask rule with exactly
// one corrective re-prompt.
Plan request_plan(ChatRequest req, const std::string& query, bool hierarchical, int phase, LlmClient& llm) {
    auto value = llm.complete_json(req, plan_json_shape_ok);
    auto check = check_plan(value, hierarchical, phase);
    if (!check.plan) {
        spdlog::info("plan rejected ({}); asking for a correction", check.violation);
        req.user_prompt += prompts::plan_correction(check.violation, hierarchical);
        value = llm.complete_json(req, plan_json_shape_ok);
        check = check_plan(value, hierarchical, phase);
        if (!check.plan) throw MalformedOutput("plan still invalid after correction: " + check.violation, value.dump());
    }
    check.plan->user_input = query;
    return *check.plan;
}

}  // namespace

Plan plan_initial(const std::string& query, const PlanningOptions& options, LlmClient& llm) {
    auto req = ChatRequest::make(CallTag::Plan, prompts::manager_system(),
                                 prompts::manager_plan_user(query, prompt_options(options)));
    return request_plan(std::move(req), query, options.hierarchical, 0, llm);
}

Plan replan(const Plan& plan, const TaskHistory& history, const PlanningOptions& options, LlmClient& llm) {
    if (plan.sub_tasks.empty() || plan.terminal().agent != AgentKind::Planner)
        throw PlanError("replan needs a plan whose last sub-task is PlannerAgent");
    for (std::size_t i = 0; i + 1 < plan.sub_tasks.size(); ++i) {
        if (plan.sub_tasks[i].status != SubTaskStatus::Done)
            throw PlanError("replan called before sub-task " + std::to_string(plan.sub_tasks[i].index) + " finished");
    }
    auto req = ChatRequest::make(CallTag::Replan, prompts::manager_system(),
                                 prompts::manager_replan_user(plan.user_input, prompt_options(options), history.render()));
    return request_plan(std::move(req), plan.user_input, options.hierarchical, plan.phase + 1, llm);
}

namespace {

struct SessionFailure {
    FailureReason reason;
    std::string detail;
};

std::string summarize(const RecommendationResponse& r) {
    std::vector<std::string> labels;
    for (const auto& l : r.lists) labels.push_back(l.label);
    return std::to_string(r.lists.size()) + " list(s): " + text::join(labels, "; ");
}

// Runs one executor; throws on failure.
TaskRecord execute(AgentKind agent, const std::string& content, const std::string& input, int phase,
                   const SessionDeps& deps, LlmClient& llm) {
    TaskRecord rec;
    rec.content = content;
    rec.agent = agent;
    rec.input = input;
    rec.phase = phase;
    switch (agent) {
        case AgentKind::Searcher:
            rec.attributes = searcher(input, deps.executors, llm);
            rec.output = text::join(rec.attributes, ", ");
            break;
        case AgentKind::ItemRetriever: {
            auto list = item_retriever(input, deps.executors, llm);
            rec.item_ids = list.ids();
            rec.output = render_ranked_items(list, deps.executors.catalog);
            break;
        }
        default:
            throw ExecutorError("agent " + std::string(agent_wire_name(agent)) + " is not an executor");
    }
    return rec;
}

class Session {
public:
    Session(const std::string& query, const PlannerStrategy& strategy, const SessionDeps& deps, LlmClient& llm)
        : strategy_(strategy), deps_(deps), llm_(llm) {
        result_.trajectory.query = query;
        result_.trajectory.strategy = strategy.name();
    }

    SessionResult run() {
        try {
            auto& traj = result_.trajectory;
            options_.hierarchical = strategy_.hierarchical;
            options_.plan_and_solve = strategy_.kind == StrategyKind::PlanAndSolve;
            if (strategy_.use_patterns && deps_.store) {
                auto match = match_pattern(traj.query, *deps_.store, deps_.config.top_k, llm_, deps_.pattern_embedder);
                traj.guidance = match.matched() ? GuidanceMode::Matched : GuidanceMode::Novel;
                traj.pattern_id = match.pattern_id;
                traj.nearest_ids = match.nearest_ids;
                options_.guidance = guidance_for(match, *deps_.store);
            }
            traj.plans.push_back(plan_initial(traj.query, options_, llm_));
            while (!result_.response) run_phase();
        } catch (const SessionFailure& f) {
            fail(f.reason, f.detail);
        } catch (const MalformedOutput& e) {
            fail(FailureReason::MalformedOutput, e.what());
        } catch (const Error& e) {
            fail(FailureReason::ExecutorFailure, e.what());
        } catch (const std::exception& e) {
            fail(FailureReason::ExecutorFailure, std::string("unexpected: ") + e.what());
        }
        return std::move(result_);
    }

private:
    void fail(FailureReason reason, const std::string& detail) {
        result_.failure_reason = reason;
        result_.failure_detail = detail;
        result_.trajectory.failure = reason;
        result_.response.reset();
    }

    void run_phase() {
        auto& traj = result_.trajectory;
        Plan& plan = traj.plans.back();
        for (std::size_t i = 0; i + 1 < plan.sub_tasks.size(); ++i) run_subtask(plan, plan.sub_tasks[i]);

        SubTask& terminal = plan.sub_tasks.back();
        if (terminal.agent == AgentKind::Planner) {
            if (static_cast<int>(traj.plans.size()) >= deps_.config.max_phases) {
                terminal.status = SubTaskStatus::Failed;
                throw SessionFailure{FailureReason::IterationThreshold,
                                     "phase count would exceed " + std::to_string(deps_.config.max_phases)};
            }
            Plan next = replan(plan, traj.history, options_, llm_);
            terminal.status = SubTaskStatus::Done;
            terminal.attempts = 1;
            traj.history.append({terminal.content, AgentKind::Planner, terminal.content, next.main_task, plan.phase, {}, {}});
            traj.plans.push_back(std::move(next));
            return;
        }
        finish(plan, terminal);
    }

    void run_subtask(const Plan& plan, SubTask& task) {
        std::string last_error;
        while (task.attempts < deps_.config.retry_limit) {
            ++task.attempts;
            try {
                auto input = interpret(task.content, result_.trajectory.history, agent_wire_name(task.agent), llm_,
                                       strategy_.hierarchical);
                result_.trajectory.history.append(execute(task.agent, task.content, input, plan.phase, deps_, llm_));
                task.status = SubTaskStatus::Done;
                return;
            } catch (const Error& e) {
                last_error = e.what();
                spdlog::info("sub-task {} attempt {} failed: {}", task.index, task.attempts, last_error);
            }
        }
        task.status = SubTaskStatus::Failed;
        throw SessionFailure{FailureReason::ExecutorFailure,
                             "sub-task " + std::to_string(task.index) + " failed: " + last_error};
    }

    void finish(const Plan& plan, SubTask& terminal) {
        auto& history = result_.trajectory.history;
        if (!history.has_retrieval()) {
            terminal.status = SubTaskStatus::Failed;
            throw SessionFailure{FailureReason::ExecutorFailure, "nothing was retrieved before the final response"};
        }
        std::string last_error;
        while (terminal.attempts < deps_.config.retry_limit) {
            ++terminal.attempts;
            try {
                auto instruction = interpret(terminal.content, history, agent_wire_name(AgentKind::Interactor), llm_,
                                             strategy_.hierarchical);
                auto response = interactor(history, instruction, deps_.executors.catalog, llm_);
                history.append({terminal.content, AgentKind::Interactor, instruction, summarize(response), plan.phase, {}, {}});
                terminal.status = SubTaskStatus::Done;
                result_.response = std::move(response);
                return;
            } catch (const Error& e) {
                last_error = e.what();
            }
        }
        terminal.status = SubTaskStatus::Failed;
        throw SessionFailure{FailureReason::ExecutorFailure, "final response failed: " + last_error};
    }

    PlannerStrategy strategy_;
    const SessionDeps& deps_;
    LlmClient& llm_;
    PlanningOptions options_;
    SessionResult result_;
};

bool react_shape_ok(const json& v) {
    return v.is_object() && v.contains("action") && v["action"].is_string() && v.contains("input") &&
           v["input"].is_string();
}

std::string one_line(const TaskRecord& rec) {
    if (rec.agent != AgentKind::ItemRetriever) return rec.output;
    std::string s = "retrieved " + std::to_string(rec.item_ids.size()) + " items:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, rec.item_ids.size()); ++i) s += " [" + rec.item_ids[i] + "]";
    return s;
}

}  // namespace

SessionResult run_session(const std::string& query, const PlannerStrategy& strategy, const SessionDeps& deps,
                          LlmClient& llm, const FeedbackFn& feedback, const std::string& scenario_tag) {
    SessionResult result;
    if (strategy.kind == StrategyKind::Reflexion) {
        result = run_reflexion(query, strategy, deps, llm, feedback);
    } else if (strategy.kind == StrategyKind::ReAct) {
        result = run_react(query, deps, llm, strategy.react_max_steps);
    } else {
        result = Session(query, strategy, deps, llm).run();
    }
    result.trajectory.strategy = strategy.name();
    result.trajectory.scenario_tag = scenario_tag;
    return result;
}

SessionResult run_react(const std::string& query, const SessionDeps& deps, LlmClient& llm, std::size_t max_steps,
                        const std::vector<std::string>& reflections) {
    if (max_steps == 0) throw PlanError("max_steps must be at least 1");
    SessionResult result;
    auto& traj = result.trajectory;
    traj.query = query;
    traj.strategy = "ReAct";
    traj.reflections = reflections;
    std::string pad;
    try {
        for (std::size_t step = 1; step <= max_steps; ++step) {
            const std::string n = std::to_string(step);
            auto req = ChatRequest::make(CallTag::Plan, prompts::react_system(), prompts::react_user(query, pad, reflections));
            auto reply = llm.complete_json(req, react_shape_ok);
            const std::string thought = reply.value("thought", "");
            const std::string action = reply["action"];
            const std::string input = reply["input"];
            pad += "Thought" + n + ": " + thought + "\n";
            traj.react_steps.push_back("Thought" + n + ": " + thought);

            auto agent = parse_agent(action);
            if (!agent || *agent == AgentKind::TaskInterpreter || *agent == AgentKind::Planner) {
                result.failure_reason = FailureReason::ExecutorFailure;
                result.failure_detail = "unknown action '" + action + "'";
                traj.failure = result.failure_reason;
                return result;
            }
            const std::string act = "Action" + n + "[" + std::string(agent_wire_name(*agent)) + "]: " + input;
            pad += act + "\n";
            traj.react_steps.push_back(act);

            std::string observation;
            try {
                if (*agent == AgentKind::Interactor) {
                    if (!traj.history.has_retrieval()) throw ExecutorError("nothing retrieved yet");
                    auto response = interactor(traj.history, input, deps.executors.catalog, llm);
                    traj.history.append({input, AgentKind::Interactor, input, summarize(response), 0, {}, {}});
                    traj.react_steps.push_back("Observation" + n + ": " + summarize(response));
                    result.response = std::move(response);
                    return result;
                }
                auto rec = execute(*agent, input, input, 0, deps, llm);
                observation = one_line(rec);
                traj.history.append(std::move(rec));
            } catch (const Error& e) {
                observation = std::string("Error: ") + e.what();
            }
            pad += "Observation" + n + ": " + observation + "\n";
            traj.react_steps.push_back("Observation" + n + ": " + observation);
        }
        result.failure_reason = FailureReason::IterationThreshold;
        result.failure_detail = "no final response within " + std::to_string(max_steps) + " steps";
    } catch (const MalformedOutput& e) {
        result.failure_reason = FailureReason::MalformedOutput;
        result.failure_detail = e.what();
    } catch (const std::exception& e) {
        result.failure_reason = FailureReason::ExecutorFailure;
        result.failure_detail = e.what();
    }
    traj.failure = result.failure_reason;
    return result;
}

SessionResult run_reflexion(const std::string& query, const PlannerStrategy& strategy, const SessionDeps& deps,
                            LlmClient& llm, const FeedbackFn& feedback) {
    std::vector<std::string> reflections;
    std::vector<std::string> steps;
    SessionResult result;
    for (int attempt = 1; attempt <= std::max(1, strategy.reflexion_attempts); ++attempt) {
        result = run_react(query, deps, llm, strategy.react_max_steps, reflections);
        for (const auto& s : result.trajectory.react_steps) steps.push_back("Attempt" + std::to_string(attempt) + " " + s);
        result.trajectory.attempts = attempt;

        std::optional<std::string> complaint;
        if (!result.ok()) {
            complaint = "the attempt ended without a recommendation (" + result.failure_detail + ")";
        } else if (feedback) {
            complaint = feedback(*result.response);
            result.trajectory.user_rejected = complaint.has_value();
        }
        if (!complaint || attempt == strategy.reflexion_attempts) break;

        std::string pad = text::join(result.trajectory.react_steps, "\n");
        auto req = ChatRequest::make(CallTag::Replan, prompts::reflect_system(), prompts::reflect_user(query, pad, *complaint));
        try {
            reflections.push_back(text::trim(llm.complete(req)));
        } catch (const Error& e) {
            spdlog::warn("reflection failed: {}", e.what());
            break;
        }
    }
    result.trajectory.react_steps = std::move(steps);
    result.trajectory.reflections = reflections;
    return result;
}

}  // namespace taira
