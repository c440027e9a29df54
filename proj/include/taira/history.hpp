#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taira {

enum class AgentKind { Searcher, ItemRetriever, TaskInterpreter, Interactor, Planner };

// Wire names as they appear in plan JSON: SearcherAgent, ItemRetrievalAgent, ...
std::string_view agent_wire_name(AgentKind agent);
std::optional<AgentKind> parse_agent(std::string_view wire_name);

bool is_terminal_agent(AgentKind agent);

struct TaskRecord {
    std::string content;
    AgentKind agent = AgentKind::Searcher;
    std::string input;   // what the Task Interpreter produced
    std::string output;
    int phase = 0;
    std::vector<std::string> item_ids;    // ItemRetriever outputs
    std::vector<std::string> attributes;  // Searcher outputs
};

// The accumulated information set handed to replanning. Append-only.
class TaskHistory {
public:
    void append(TaskRecord record) { records_.push_back(std::move(record)); }

    const std::vector<TaskRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    bool has_retrieval() const;
    bool contains_item(const std::string& id) const;

    // "Task1[SearcherAgent] (phase 0): ...\nInput1: ...\nOutput1: ..." or "none".
    std::string render() const;

private:
    std::vector<TaskRecord> records_;
};

}  // namespace taira
