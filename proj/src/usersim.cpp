#include "taira/usersim.hpp"

#include "taira/errors.hpp"
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace taira {

using nlohmann::json;

namespace {

struct ScenarioRow {
    Scenario scenario;
    std::string_view name;
    Difficulty difficulty;
    double weight;
    std::string_view description;
    std::string_view example;
};

// Descriptions expand the one-line table entries into what the simulated user
// is told about its own requirements.
constexpr std::array<ScenarioRow, 7> kScenarioTable = {{
    {Scenario::DirectReference, "direct_reference", Difficulty::Easy, 33.2,
     "Describe the product directly: you name the product type and the attributes you want.",
     "I am looking for a women's pajama set that is thermal and comfortable for the colder months."},
    {Scenario::Occasions, "occasions", Difficulty::Medium, 13.6,
     "Propose usage occasion: you describe the occasion the product should be suitable for rather than its "
     "attributes.",
     "I want women's sandals that are suitable for beach outings and relaxed gatherings."},
    {Scenario::Matching, "matching", Difficulty::Medium, 11.2,
     "Additional matching requests: you want one product and also other products that match it, so one list is "
     "needed per product.",
     "Additionally, recommend an additional pair of pants and socks to go with these shoes."},
    {Scenario::MultiTypes, "multi_types", Difficulty::Medium, 9.7,
     "Requirements for different types of products: you want several different types of products, each meeting "
     "its own requirement.",
     "I'm searching for some classic rock tracks to energize my morning workout. Please recommend me some different "
     "styles of music."},
    {Scenario::Bundle, "bundle", Difficulty::Hard, 10.7,
     "Request for a bundle of products: you want a set of products that together meet one need, so several lists "
     "are needed.",
     "Could you guide me to a set of clothes that are ideal for beach outings and casual gatherings?"},
    {Scenario::Ambiguous, "ambiguous", Difficulty::Hard, 11.5,
     "With ambiguous requirement: you are not sure about the specific scene, so you expect lists covering several "
     "possible scenes.",
     "Could you recommend some women's sneakers that are great for walking and hanging out with friends? I'm not "
     "sure about the specific wearing scene."},
    {Scenario::MultiOccasions, "multi_occasions", Difficulty::Hard, 10.1,
     "Requirements for different occassions: you want a product for one occasion and are also looking for products "
     "for another occasion.",
     "Could you suggest a playlist that fits my need for introspective moments during a late-night drive? I'm also "
     "looking for something that can help with emotional expression."},
}};

struct SemanticRow {
    Semantic semantic;
    std::string_view phrase;
    double weight;
};

constexpr std::array<SemanticRow, 8> kSemanticTable = {{
    {Semantic::CanYouRecommend, "Can you recommend", 18.5},
    {Semantic::IAmLookingFor, "I am looking for", 16.6},
    {Semantic::DoYouHaveAnySuggestions, "Do you have any suggestions", 15.5},
    {Semantic::CanYouHelpMeChoose, "Can you help me choose", 14.2},
    {Semantic::WhatsTheBest, "What's the best", 10.5},
    {Semantic::ShowMe, "Show me", 9.2},
    {Semantic::INeedAdviceOnChoosing, "I need advice on choosing", 8.9},
    {Semantic::WhereCanIFind, "Where can I find", 6.6},
}};

const ScenarioRow& row(Scenario s) { return kScenarioTable[static_cast<std::size_t>(s)]; }
const SemanticRow& row(Semantic s) { return kSemanticTable[static_cast<std::size_t>(s)]; }

template <typename T>
T weighted_pick(std::mt19937_64& rng, const std::vector<std::pair<T, double>>& options) {
    double total = 0.0;
    for (const auto& [v, w] : options) total += w;
    double x = unit_draw(rng) * total;
    for (const auto& [v, w] : options) {
        if (x < w) return v;
        x -= w;
    }
    return options.back().first;
}

}  // namespace

std::string_view scenario_name(Scenario s) { return row(s).name; }
Difficulty difficulty_of(Scenario s) { return row(s).difficulty; }
double scenario_weight(Scenario s) { return row(s).weight; }
std::string_view scenario_description(Scenario s) { return row(s).description; }
std::string_view scenario_example(Scenario s) { return row(s).example; }

Scenario parse_scenario(std::string_view name) {
    for (const auto& r : kScenarioTable) {
        if (r.name == name) return r.scenario;
    }
    throw UsersimError("unknown scenario '" + std::string(name) + "'");
}

std::string_view difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
    }
    return "easy";
}

Difficulty parse_difficulty(std::string_view name) {
    for (auto d : kAllDifficulties) {
        if (difficulty_name(d) == name) return d;
    }
    throw UsersimError("unknown difficulty '" + std::string(name) + "'");
}

std::string_view semantic_phrase(Semantic s) { return row(s).phrase; }
double semantic_weight(Semantic s) { return row(s).weight; }

Semantic parse_semantic(std::string_view phrase) {
    for (const auto& r : kSemanticTable) {
        if (r.phrase == phrase) return r.semantic;
    }
    throw UsersimError("unknown semantic opener '" + std::string(phrase) + "'");
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Scenario sample_scenario(std::mt19937_64& rng, std::optional<Difficulty> tier) {
    std::vector<std::pair<Scenario, double>> options;
    for (const auto& r : kScenarioTable) {
        if (!tier || r.difficulty == *tier) options.emplace_back(r.scenario, r.weight);
    }
    return weighted_pick(rng, options);
}

Semantic sample_semantic(std::mt19937_64& rng) {
    std::vector<std::pair<Semantic, double>> options;
    for (const auto& r : kSemanticTable) options.emplace_back(r.semantic, r.weight);
    return weighted_pick(rng, options);
}

void QuerySpec::validate() const {
    if (query_id.empty()) throw UsersimError("query spec without an id");
    if (text::trim(query_text).empty()) throw UsersimError("query " + query_id + " has empty text");
    if (difficulty_of(scenario) != difficulty)
        throw UsersimError("query " + query_id + ": scenario " + std::string(scenario_name(scenario)) +
                           " is not " + std::string(difficulty_name(difficulty)));
    if (!text::contains_ci(query_text, semantic_phrase(semantic)))
        throw UsersimError("query " + query_id + " does not contain its opener '" +
                           std::string(semantic_phrase(semantic)) + "'");
}

json QuerySpec::to_json() const {
    return {{"query_id", query_id},
            {"query_text", query_text},
            {"user_id", user_id},
            {"target_item_id", target_item_id},
            {"scenario", scenario_name(scenario)},
            {"difficulty", difficulty_name(difficulty)},
            {"semantic", semantic_phrase(semantic)},
            {"scenario_description", scenario_description}};
}

QuerySpec QuerySpec::from_json(const json& v) {
    QuerySpec q;
    try {
        q.query_id = v.at("query_id");
        q.query_text = v.at("query_text");
        q.user_id = v.value("user_id", "");
        q.target_item_id = v.at("target_item_id");
        q.scenario = parse_scenario(v.at("scenario").get<std::string>());
        q.difficulty = v.contains("difficulty") ? parse_difficulty(v["difficulty"].get<std::string>())
                                                : difficulty_of(q.scenario);
        q.semantic = parse_semantic(v.at("semantic").get<std::string>());
        q.scenario_description = v.value("scenario_description", std::string(taira::scenario_description(q.scenario)));
    } catch (const json::exception& e) {
        throw UsersimError(std::string("malformed query spec: ") + e.what());
    }
    return q;
}

std::vector<QuerySpec> load_suite(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsersimError("cannot read query suite " + path.string());
    std::vector<QuerySpec> suite;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            suite.push_back(QuerySpec::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw UsersimError(path.string() + " line " + std::to_string(n) + ": " + e.what());
        }
    }
    if (suite.empty()) throw UsersimError("query suite " + path.string() + " is empty");
    return suite;
}

void save_suite(const std::filesystem::path& path, const std::vector<QuerySpec>& suite) {
    std::ofstream out(path);
    if (!out) throw UsersimError("cannot write query suite " + path.string());
    for (const auto& q : suite) out << q.to_json().dump() << "\n";
}

std::string item_type(const Item& item) {
    if (auto it = item.meta.find("type"); it != item.meta.end() && !it->second.empty()) return it->second;
    return item.attribute_path.back();
}

std::vector<std::string> item_attributes(const Item& item) {
    // Entries below the deepest node the type covers ("Women > Pants" for
    // "women's pants") are the descriptive ones.
    const auto type_tokens = text::token_set(item_type(item));
    const auto& path = item.attribute_path;
    auto covered = [&](const std::string& node) {
        const auto toks = text::tokenize(node);
        return !toks.empty() &&
               std::all_of(toks.begin(), toks.end(), [&](const auto& t) { return type_tokens.count(t) != 0; });
    };
    std::size_t start = 1;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (covered(path[i])) start = i + 1;
    }
    std::vector<std::string> out(path.begin() + static_cast<std::ptrdiff_t>(std::min(start, path.size())), path.end());
    if (out.empty()) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (!covered(path[i])) out.push_back(path[i]);
        }
    }
    if (out.empty()) out.push_back(path.front());
    return out;
}

std::vector<QuerySpec> generate_queries(const Catalog& catalog, const DifficultyCounts& counts, std::uint64_t seed,
                                        LlmClient& llm) {
    std::size_t total = 0;
    for (const auto& [d, n] : counts) {
        if (n == 0) throw UsersimError("count for " + std::string(difficulty_name(d)) + " must be positive");
        total += n;
    }
    if (total == 0) throw UsersimError("no queries requested");
    const auto& histories = catalog.histories();
    if (histories.empty()) throw UsersimError("the catalog has no user histories");
    if (histories.size() < total)
        throw UsersimError("insufficient histories: " + std::to_string(total) + " queries requested, " +
                           std::to_string(histories.size()) + " users available");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(histories.size());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates on unit_draw keeps the permutation platform independent.
    for (std::size_t i = order.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[j]);
    }

    std::vector<QuerySpec> out;
    std::size_t next_user = 0;
    for (auto d : kAllDifficulties) {
        auto it = counts.find(d);
        if (it == counts.end()) continue;
        for (std::size_t k = 0; k < it->second; ++k) {
            const UserHistory& h = histories[order[next_user++]];
            validate_history(h, catalog);
            const Item& target = catalog.at(h.target_item());
            const std::string profile = h.profile_text.empty() ? build_profile(h, catalog, llm) : h.profile_text;
            const auto variation = static_cast<unsigned>(rng() % 1000003);

            std::string desc = text::first_words(target.description, 60);
            auto atomic_req = ChatRequest::make(CallTag::QueryGen, prompts::query_gen_system(),
                                                prompts::atomic_query_user(target.title, item_type(target),
                                                                           item_attributes(target), desc, variation));
            const std::string atomic = text::trim(llm.complete(atomic_req));

            QuerySpec q;
            q.scenario = sample_scenario(rng, d);
            q.difficulty = d;
            q.semantic = sample_semantic(rng);
            q.scenario_description = std::string(scenario_description(q.scenario));
            q.user_id = h.user_id;
            q.target_item_id = target.id;

            prompts::FinalQueryFields f;
            f.profile = profile;
            f.atomic_query = atomic;
            f.title = target.title;
            f.item_type = item_type(target);
            f.attributes = item_attributes(target);
            f.scenario_name = std::string(scenario_name(q.scenario));
            f.scenario_description = q.scenario_description;
            f.scenario_example = std::string(scenario_example(q.scenario));
            f.opener = std::string(semantic_phrase(q.semantic));
            f.variation = variation;
            auto final_req = ChatRequest::make(CallTag::QueryGen, prompts::query_gen_system(), prompts::final_query_user(f));
            q.query_text = text::trim(llm.complete(final_req));
            if (!text::contains_ci(q.query_text, f.opener)) {
                spdlog::info("generated query lacks its opener; prefixing '{}'", f.opener);
                q.query_text = f.opener + " " + q.query_text;
            }
            char id[16];
            std::snprintf(id, sizeof id, "q%04zu", out.size() + 1);
            q.query_id = id;
            q.validate();
            out.push_back(std::move(q));
        }
    }
    return out;
}

json SimVerdict::to_json() const {
    return {{"failed", failed}, {"reason", reason}, {"scores", score_lists}, {"adjustments", adjustments}};
}

SimVerdict SimVerdict::from_json(const json& v) {
    SimVerdict s;
    s.failed = v.at("failed");
    s.reason = v.value("reason", "");
    s.score_lists = v.at("scores").get<std::vector<std::vector<double>>>();
    s.adjustments = v.value("adjustments", std::vector<std::string>{});
    return s;
}

double clamp_score(double raw) {
    static constexpr std::array<double, 4> allowed = {0.0, 0.5, 1.0, 2.0};
    if (!std::isfinite(raw)) return 0.0;
    double best = allowed[0];
    for (double a : allowed) {
        if (std::fabs(raw - a) < std::fabs(raw - best)) best = a;
    }
    return best;
}

std::string render_lists_for_judge(const RecommendationResponse& response) {
    std::string out;
    for (std::size_t i = 0; i < response.lists.size(); ++i) {
        const auto& l = response.lists[i];
        out += "\nList " + std::to_string(i + 1) + " (" + l.label + "):";
        for (std::size_t j = 0; j < l.items.size(); ++j) {
            out += (j ? "; " : " ") + std::string("[") + l.items[j].first + "] " + l.items[j].second;
        }
    }
    return out;
}

SimVerdict judge(const QuerySpec& spec, const RecommendationResponse& response, const Catalog& catalog, LlmClient& llm) {
    if (auto v = response.violation(); !v.empty()) throw UsersimError("cannot judge an invalid response: " + v);
    const Item& target = catalog.at(spec.target_item_id);
    auto req = ChatRequest::make(CallTag::Simulator, prompts::simulator_system(),
                                 prompts::simulator_user(spec.query_text, item_sample_rendering(target),
                                                         spec.scenario_description, render_lists_for_judge(response)));
    const std::size_t lists = response.lists.size();
    auto shape = [&](const json& v) {
        if (!v.is_object() || !v.contains("fail") || !v["fail"].is_boolean()) return false;
        if (!v.contains("scores") || !v["scores"].is_array() || v["scores"].size() != lists) return false;
        for (std::size_t i = 0; i < lists; ++i) {
            const auto& row = v["scores"][i];
            if (!row.is_array() || row.size() != response.lists[i].items.size()) return false;
            for (const auto& s : row) {
                if (!s.is_number()) return false;
            }
        }
        return true;
    };

    SimVerdict verdict;
    json value;
    try {
        value = llm.complete_json(req, shape);
    } catch (const MalformedOutput&) {
        verdict.failed = true;
        verdict.reason = "unparseable";
        for (const auto& l : response.lists) verdict.score_lists.emplace_back(l.items.size(), 0.0);
        return verdict;
    }
    verdict.failed = value["fail"].get<bool>();
    verdict.reason = value.value("reason", verdict.failed ? "the simulated user rejected the lists" : "");
    for (std::size_t i = 0; i < lists; ++i) {
        std::vector<double> scores;
        for (std::size_t j = 0; j < response.lists[i].items.size(); ++j) {
            const double raw = value["scores"][i][j].get<double>();
            double s = clamp_score(raw);
            const std::string pos = "list " + std::to_string(i + 1) + " item " + std::to_string(j + 1);
            if (s != raw) {
                verdict.adjustments.push_back(pos + ": clamped " + json(raw).dump() + " to " + json(s).dump());
                spdlog::info("{}", verdict.adjustments.back());
            }
            if (s == 2.0 && response.lists[i].items[j].first != spec.target_item_id) {
                s = 1.0;
                verdict.adjustments.push_back(pos + ": score 2 on a non-target item lowered to 1");
                spdlog::info("{}", verdict.adjustments.back());
            }
            scores.push_back(verdict.failed ? 0.0 : s);
        }
        verdict.score_lists.push_back(std::move(scores));
    }
    return verdict;
}

}  // namespace taira
