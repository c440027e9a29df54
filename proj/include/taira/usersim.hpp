#pragma once

#include "taira/catalog.hpp"
#include "taira/executors.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace taira {

class LlmClient;

enum class Scenario { DirectReference, Occasions, Matching, MultiTypes, Bundle, Ambiguous, MultiOccasions };
enum class Difficulty { Easy, Medium, Hard };
enum class Semantic {
    CanYouRecommend,
    IAmLookingFor,
    DoYouHaveAnySuggestions,
    CanYouHelpMeChoose,
    WhatsTheBest,
    ShowMe,
    INeedAdviceOnChoosing,
    WhereCanIFind,
};

inline constexpr std::array<Scenario, 7> kAllScenarios = {
    Scenario::DirectReference, Scenario::Occasions, Scenario::Matching,      Scenario::MultiTypes,
    Scenario::Bundle,          Scenario::Ambiguous, Scenario::MultiOccasions};
inline constexpr std::array<Semantic, 8> kAllSemantics = {
    Semantic::CanYouRecommend, Semantic::IAmLookingFor, Semantic::DoYouHaveAnySuggestions,
    Semantic::CanYouHelpMeChoose, Semantic::WhatsTheBest, Semantic::ShowMe,
    Semantic::INeedAdviceOnChoosing, Semantic::WhereCanIFind};
inline constexpr std::array<Difficulty, 3> kAllDifficulties = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};

std::string_view scenario_name(Scenario s);  // direct_reference, occasions, ...
Scenario parse_scenario(std::string_view name);
Difficulty difficulty_of(Scenario s);
double scenario_weight(Scenario s);  // percent of all queries
std::string_view scenario_description(Scenario s);
std::string_view scenario_example(Scenario s);

std::string_view difficulty_name(Difficulty d);
Difficulty parse_difficulty(std::string_view name);

std::string_view semantic_phrase(Semantic s);
double semantic_weight(Semantic s);  // percent
Semantic parse_semantic(std::string_view phrase);

// Uniform [0,1) from the top 53 bits; identical on every platform, unlike
// the std distributions.
double unit_draw(std::mt19937_64& rng);

// Weighted draw; weights within a difficulty tier are renormalized.
Scenario sample_scenario(std::mt19937_64& rng, std::optional<Difficulty> tier = std::nullopt);
Semantic sample_semantic(std::mt19937_64& rng);

struct QuerySpec {
    std::string query_id;
    std::string query_text;
    std::string user_id;
    std::string target_item_id;
    Scenario scenario = Scenario::DirectReference;
    Difficulty difficulty = Difficulty::Easy;
    Semantic semantic = Semantic::CanYouRecommend;
    std::string scenario_description;

    void validate() const;  // throws UsersimError
    nlohmann::json to_json() const;
    static QuerySpec from_json(const nlohmann::json& value);
    bool operator==(const QuerySpec&) const = default;
};

std::vector<QuerySpec> load_suite(const std::filesystem::path& path);
void save_suite(const std::filesystem::path& path, const std::vector<QuerySpec>& suite);

// Item type and descriptive attributes as presented to the query generator.
std::string item_type(const Item& item);
std::vector<std::string> item_attributes(const Item& item);

using DifficultyCounts = std::map<Difficulty, std::size_t>;

// Deterministic for a fixed seed and a deterministic provider.
std::vector<QuerySpec> generate_queries(const Catalog& catalog, const DifficultyCounts& counts, std::uint64_t seed,
                                        LlmClient& llm);

struct SimVerdict {
    bool failed = false;
    std::string reason;
    std::vector<std::vector<double>> score_lists;
    std::vector<std::string> adjustments;  // clamping and downgrade log

    nlohmann::json to_json() const;
    static SimVerdict from_json(const nlohmann::json& value);
    bool operator==(const SimVerdict&) const = default;
};

// Nearest of {0, 0.5, 1, 2}; ties go to the lower value.
double clamp_score(double raw);

std::string render_lists_for_judge(const RecommendationResponse& response);

SimVerdict judge(const QuerySpec& spec, const RecommendationResponse& response, const Catalog& catalog, LlmClient& llm);

}  // namespace taira
