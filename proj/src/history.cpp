#include "taira/history.hpp"

#include <algorithm>
#include <array>

namespace taira {

namespace {

struct AgentName {
    AgentKind kind;
    std::string_view wire;
};

constexpr std::array<AgentName, 5> kAgentNames = {{
    {AgentKind::Searcher, "SearcherAgent"},
    {AgentKind::ItemRetriever, "ItemRetrievalAgent"},
    {AgentKind::TaskInterpreter, "TaskInterpreterAgent"},
    {AgentKind::Interactor, "InteractorAgent"},
    {AgentKind::Planner, "PlannerAgent"},
}};

}  // namespace

std::string_view agent_wire_name(AgentKind agent) {
    for (const auto& a : kAgentNames) {
        if (a.kind == agent) return a.wire;
    }
    return "UnknownAgent";
}

std::optional<AgentKind> parse_agent(std::string_view wire_name) {
    for (const auto& a : kAgentNames) {
        if (a.wire == wire_name) return a.kind;
    }
    return std::nullopt;
}

bool is_terminal_agent(AgentKind agent) { return agent == AgentKind::Planner || agent == AgentKind::Interactor; }

bool TaskHistory::has_retrieval() const {
    return std::any_of(records_.begin(), records_.end(),
                       [](const TaskRecord& r) { return r.agent == AgentKind::ItemRetriever && !r.item_ids.empty(); });
}

bool TaskHistory::contains_item(const std::string& id) const {
    for (const auto& r : records_) {
        if (r.agent != AgentKind::ItemRetriever) continue;
        if (std::find(r.item_ids.begin(), r.item_ids.end(), id) != r.item_ids.end()) return true;
    }
    return false;
}

std::string TaskHistory::render() const {
    if (records_.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        const std::string n = std::to_string(i + 1);
        out += "Task" + n + "[" + std::string(agent_wire_name(r.agent)) + "] (phase " + std::to_string(r.phase) +
               "): " + r.content + "\n";
        out += "Input" + n + ": " + r.input + "\n";
        out += "Output" + n + ": " + r.output + "\n";
    }
    return out;
}

}  // namespace taira
