#pragma once

#include "taira/plan.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace taira {

class EmbeddingProvider;
class LlmClient;

enum class PatternSource { AgentSuccess, AgentFailedExpertCorrected, ExpertDirect };

std::string_view source_name(PatternSource source);
PatternSource parse_source(std::string_view name);
bool is_expert_source(PatternSource source);

struct ThoughtPattern {
    std::string id;
    std::string task_description;
    std::string solution_description;
    std::string thought_template;  // "Phase N:" / "Step N:" structured
    PatternSource source = PatternSource::AgentSuccess;
    std::string scenario_tag = "untagged";
    std::vector<float> embedding;  // over task_description

    void validate() const;  // throws PatternError
    nlohmann::json to_json() const;  // without the embedding
    static ThoughtPattern from_json(const nlohmann::json& value);
    bool operator==(const ThoughtPattern&) const = default;
};

// Copy-on-write collection: readers take an immutable snapshot, writers
// commit a new version under a single lock.
class PatternStore {
public:
    using Snapshot = std::shared_ptr<const std::vector<ThoughtPattern>>;

    PatternStore();
    explicit PatternStore(std::vector<ThoughtPattern> patterns);
    PatternStore(const PatternStore& other);
    PatternStore& operator=(const PatternStore& other);

    Snapshot snapshot() const;
    std::size_t size() const { return snapshot()->size(); }
    bool empty() const { return size() == 0; }
    std::optional<ThoughtPattern> get(const std::string& id) const;
    std::set<std::string> scenario_tags() const;

    // Mints "tp-N" when the id is empty; returns the stored id.
    std::string add(ThoughtPattern pattern);
    // Replaces the pattern with the same id in place.
    void replace(ThoughtPattern pattern);
    // Removes every pattern carrying the tag; throws PatternError for an unknown tag.
    std::size_t remove_by_scenario(const std::string& scenario_tag);

    // Fills missing or stale embeddings from the provider.
    void ensure_embeddings(const EmbeddingProvider& provider);

    PatternStore filter_sources(const std::set<PatternSource>& keep) const;

    // patterns.json (array) + patterns.embeddings.json sidecar in dir.
    void save(const std::filesystem::path& dir) const;
    static PatternStore load(const std::filesystem::path& dir);

private:
    mutable std::mutex mu_;
    Snapshot patterns_;
};

struct MatchResult {
    enum class Outcome { Matched, Novel };

    Outcome outcome = Outcome::Novel;
    std::string pattern_id;                                // set when matched
    std::vector<std::string> nearest_ids;                  // set when novel
    std::vector<std::pair<std::string, double>> candidates;  // top-K by similarity

    bool matched() const { return outcome == Outcome::Matched; }
};

inline constexpr std::size_t kDefaultTopK = 5;

// Top-K by similarity of query to task descriptions (cosine over embeddings
// when the provider and stored vectors agree, token Jaccard otherwise); the
// selector LLM then picks one candidate or none.
MatchResult match_pattern(const std::string& query, const PatternStore& store, std::size_t k, LlmClient& llm,
                          const EmbeddingProvider* provider = nullptr);

// Ranking stage only, exposed for inspection.
std::vector<std::pair<std::string, double>> rank_patterns(const std::string& query, const PatternStore& store,
                                                          std::size_t k, const EmbeddingProvider* provider);

// Thought Pattern Distillation. The returned pattern keeps old's id (replace
// in place) or has an empty id (new pattern to be minted on add).
ThoughtPattern distill(const std::optional<Trajectory>& route, const std::optional<std::string>& expert_opinion,
                       const std::optional<ThoughtPattern>& old, LlmClient& llm);

}  // namespace taira
