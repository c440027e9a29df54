#pragma once

#include "taira/llm.hpp"
#include "taira/orchestrator.hpp"
#include "taira/usersim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace taira {

// A slot is a hit when its score is at least 1.
inline constexpr double kHitThreshold = 1.0;

// Hits over all slots of all lists.
double hr_at_10(const SimVerdict& verdict);
// DCG/IDCG per list over the first 10 positions, averaged across lists.
double ndcg_at_10(const std::vector<double>& gains);
double ndcg_at_10(const SimVerdict& verdict);

struct QueryOutcome {
    QuerySpec spec;
    std::optional<FailureReason> failure;
    std::string failure_detail;
    std::optional<SimVerdict> verdict;
    LedgerSnapshot ledger;
    Trajectory trajectory;

    bool success() const { return !failure && verdict && !verdict->failed; }
    // Session failures count as zero.
    double hr() const { return verdict && !failure ? hr_at_10(*verdict) : 0.0; }
    double ndcg() const { return verdict && !failure ? ndcg_at_10(*verdict) : 0.0; }

    nlohmann::json to_json() const;
};

double success_rate(const std::vector<QueryOutcome>& outcomes);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    bool degenerate = false;  // zero variance with a nonzero mean difference
};

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

struct Metrics {
    std::size_t count = 0;
    double hr = 0.0;
    double ndcg = 0.0;
    double sr = 0.0;

    nlohmann::json to_json() const;
};

Metrics aggregate(const std::vector<const QueryOutcome*>& outcomes);

struct ExperimentConfig {
    PlannerStrategy strategy;
    std::set<char> ablations;  // subset of T, H, E, A
    std::set<std::string> novel_tags;
    std::size_t parallelism = 4;
    std::uint64_t seed = 0;
    SessionConfig session;
};

std::set<char> parse_ablations(const std::string& spec);  // "T,H" or "TH"

// Removes novel scenario tags, then applies E (keep agent_success only) and
// A (keep expert-sourced only).
PatternStore prepare_store(const PatternStore& base, const std::set<char>& ablations,
                           const std::set<std::string>& novel_tags);

struct RunReport {
    std::string strategy;
    std::string ablations;
    std::vector<std::string> novel_tags;
    std::uint64_t seed = 0;
    std::map<std::string, Metrics> per_difficulty;
    Metrics overall;
    std::vector<QueryOutcome> outcomes;  // sorted by query id
    LedgerSnapshot ledger;
    std::size_t store_size = 0;
    std::map<std::string, std::size_t> store_sources;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    // report.json + metrics.csv
    void save(const std::filesystem::path& dir) const;
};

struct ExperimentDeps {
    const Catalog& catalog;
    const PatternStore& store;  // before ablations and novel-tag removal
    ExecutorContext executors;
    ChatProvider& provider;
    const EmbeddingProvider* pattern_embedder = nullptr;
};

RunReport run_experiment(const std::vector<QuerySpec>& suite, const ExperimentConfig& config, const ExperimentDeps& deps);

}  // namespace taira
