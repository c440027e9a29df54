#pragma once

#include "taira/executors.hpp"
#include "taira/plan.hpp"
#include "taira/thought_store.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace taira {

class LlmClient;

enum class StrategyKind { Taira, TairaNoT, TairaNoH, PlanAndSolve, ReAct, Reflexion, ZeroShot };

std::string_view strategy_name(StrategyKind kind);

// One planner per session. The TAIRA variants differ only in whether pattern
// matching runs and whether the Planner agent is offered.
struct PlannerStrategy {
    StrategyKind kind = StrategyKind::Taira;
    bool use_patterns = true;
    bool hierarchical = true;
    std::size_t react_max_steps = 8;
    int reflexion_attempts = 2;

    static PlannerStrategy of(StrategyKind kind);
    // taira | taira-not | taira-noh | plan-solve | react | reflexion | zero-shot
    static PlannerStrategy parse(std::string_view name);

    // 'T' drops pattern matching, 'H' drops the Planner agent. Other letters
    // act on the pattern store and are ignored here.
    PlannerStrategy with_ablations(const std::set<char>& ablations) const;

    bool is_react() const { return kind == StrategyKind::ReAct || kind == StrategyKind::Reflexion; }
    std::string name() const;
};

struct SessionConfig {
    std::size_t top_k = kDefaultTopK;
    int max_phases = 4;
    int retry_limit = 3;
};

struct SessionDeps {
    const PatternStore* store = nullptr;  // may be null for pattern-free strategies
    ExecutorContext executors;
    const EmbeddingProvider* pattern_embedder = nullptr;
    SessionConfig config;
};

struct SessionResult {
    std::optional<RecommendationResponse> response;
    Trajectory trajectory;
    std::optional<FailureReason> failure_reason;
    std::string failure_detail;

    bool ok() const { return response.has_value() && !failure_reason; }
};

// Returns a complaint when the user is unhappy with a response; used by Reflexion.
using FeedbackFn = std::function<std::optional<std::string>(const RecommendationResponse&)>;

// Manager guidance text for a match outcome: the full matched pattern, or the
// nearest solution descriptions for a novel task.
std::string guidance_for(const MatchResult& match, const PatternStore& store);

struct PlanningOptions {
    bool hierarchical = true;
    bool plan_and_solve = false;
    std::string guidance;
};

Plan plan_initial(const std::string& query, const PlanningOptions& options, LlmClient& llm);

// P_{i+1} = H(P_i, I_i). Requires a Planner terminal with every prior subtask done.
Plan replan(const Plan& plan, const TaskHistory& history, const PlanningOptions& options, LlmClient& llm);

// Total: every failure is reported through failure_reason.
SessionResult run_session(const std::string& query, const PlannerStrategy& strategy, const SessionDeps& deps,
                          LlmClient& llm, const FeedbackFn& feedback = {}, const std::string& scenario_tag = {});

// Thought/Action/Observation loop. Reflexion wraps it with one reflective retry
// when feedback reports a failure.
SessionResult run_react(const std::string& query, const SessionDeps& deps, LlmClient& llm, std::size_t max_steps,
                        const std::vector<std::string>& reflections = {});
SessionResult run_reflexion(const std::string& query, const PlannerStrategy& strategy, const SessionDeps& deps,
                            LlmClient& llm, const FeedbackFn& feedback);

}  // namespace taira
