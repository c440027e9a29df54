#include "taira/thought_store.hpp"

#include "taira/errors.hpp"
#include "taira/kernels.hpp"
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/retrieval.hpp"
#include "taira/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace taira {

using nlohmann::json;

std::string_view source_name(PatternSource source) {
    switch (source) {
        case PatternSource::AgentSuccess: return "agent_success";
        case PatternSource::AgentFailedExpertCorrected: return "agent_failed_expert_corrected";
        case PatternSource::ExpertDirect: return "expert_direct";
    }
    return "agent_success";
}

PatternSource parse_source(std::string_view name) {
    for (auto s : {PatternSource::AgentSuccess, PatternSource::AgentFailedExpertCorrected, PatternSource::ExpertDirect}) {
        if (source_name(s) == name) return s;
    }
    throw PatternError("unknown pattern source '" + std::string(name) + "'");
}

bool is_expert_source(PatternSource source) { return source != PatternSource::AgentSuccess; }

void ThoughtPattern::validate() const {
    if (text::trim(task_description).empty()) throw PatternError("pattern '" + id + "' has an empty task description");
    if (text::trim(solution_description).empty())
        throw PatternError("pattern '" + id + "' has an empty solution description");
    if (text::trim(thought_template).empty()) throw PatternError("pattern '" + id + "' has an empty thought template");
    if (thought_template.find("Step") == std::string::npos)
        throw PatternError("thought template of '" + id + "' has no Step marker");
}

json ThoughtPattern::to_json() const {
    return {{"id", id},
            {"task_description", task_description},
            {"solution_description", solution_description},
            {"thought_template", thought_template},
            {"source", source_name(source)},
            {"scenario_tag", scenario_tag}};
}

ThoughtPattern ThoughtPattern::from_json(const json& value) {
    try {
        ThoughtPattern p;
        p.id = value.at("id");
        p.task_description = value.at("task_description");
        p.solution_description = value.at("solution_description");
        p.thought_template = value.at("thought_template");
        p.source = parse_source(value.at("source").get<std::string>());
        p.scenario_tag = value.value("scenario_tag", "untagged");
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw PatternError(std::string("malformed pattern record: ") + e.what());
    }
}

PatternStore::PatternStore() : patterns_(std::make_shared<const std::vector<ThoughtPattern>>()) {}

PatternStore::PatternStore(std::vector<ThoughtPattern> patterns) {
    for (const auto& p : patterns) p.validate();
    patterns_ = std::make_shared<const std::vector<ThoughtPattern>>(std::move(patterns));
}

PatternStore::PatternStore(const PatternStore& other) : patterns_(other.snapshot()) {}

PatternStore& PatternStore::operator=(const PatternStore& other) {
    if (this != &other) {
        auto snap = other.snapshot();
        std::lock_guard lock(mu_);
        patterns_ = std::move(snap);
    }
    return *this;
}

PatternStore::Snapshot PatternStore::snapshot() const {
    std::lock_guard lock(mu_);
    return patterns_;
}

std::optional<ThoughtPattern> PatternStore::get(const std::string& id) const {
    auto snap = snapshot();
    for (const auto& p : *snap) {
        if (p.id == id) return p;
    }
    return std::nullopt;
}

std::set<std::string> PatternStore::scenario_tags() const {
    std::set<std::string> tags;
    for (const auto& p : *snapshot()) tags.insert(p.scenario_tag);
    return tags;
}

std::string PatternStore::add(ThoughtPattern pattern) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<std::vector<ThoughtPattern>>(*patterns_);
    if (pattern.id.empty()) {
        int max_n = 0;
        for (const auto& p : *next) {
            if (p.id.rfind("tp-", 0) == 0) {
                try {
                    max_n = std::max(max_n, std::stoi(p.id.substr(3)));
                } catch (const std::exception&) {
                }
            }
        }
        pattern.id = "tp-" + std::to_string(max_n + 1);
    }
    for (const auto& p : *next) {
        if (p.id == pattern.id) throw PatternError("duplicate pattern id '" + pattern.id + "'");
    }
    pattern.validate();
    std::string id = pattern.id;
    next->push_back(std::move(pattern));
    patterns_ = std::move(next);
    return id;
}

void PatternStore::replace(ThoughtPattern pattern) {
    pattern.validate();
    std::lock_guard lock(mu_);
    auto next = std::make_shared<std::vector<ThoughtPattern>>(*patterns_);
    auto it = std::find_if(next->begin(), next->end(), [&](const ThoughtPattern& p) { return p.id == pattern.id; });
    if (it == next->end()) throw PatternError("unknown pattern id '" + pattern.id + "'");
    *it = std::move(pattern);
    patterns_ = std::move(next);
}

std::size_t PatternStore::remove_by_scenario(const std::string& scenario_tag) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<std::vector<ThoughtPattern>>(*patterns_);
    auto removed = std::erase_if(*next, [&](const ThoughtPattern& p) { return p.scenario_tag == scenario_tag; });
    if (removed == 0) throw PatternError("unknown scenario tag '" + scenario_tag + "'");
    patterns_ = std::move(next);
    return removed;
}

void PatternStore::ensure_embeddings(const EmbeddingProvider& provider) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<std::vector<ThoughtPattern>>(*patterns_);
    for (auto& p : *next) {
        if (p.embedding.size() != provider.dimension()) p.embedding = provider.embed(p.task_description);
    }
    patterns_ = std::move(next);
}

PatternStore PatternStore::filter_sources(const std::set<PatternSource>& keep) const {
    std::vector<ThoughtPattern> kept;
    for (const auto& p : *snapshot()) {
        if (keep.count(p.source)) kept.push_back(p);
    }
    return PatternStore(std::move(kept));
}

void PatternStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto snap = snapshot();
    json arr = json::array();
    json vectors = json::object();
    std::size_t dim = 0;
    for (const auto& p : *snap) {
        arr.push_back(p.to_json());
        if (!p.embedding.empty()) {
            vectors[p.id] = p.embedding;
            dim = p.embedding.size();
        }
    }
    std::ofstream out(dir / "patterns.json", std::ios::trunc);
    if (!out) throw PatternError("cannot write " + (dir / "patterns.json").string());
    out << arr.dump(2) << "\n";
    if (!vectors.empty()) {
        std::ofstream side(dir / "patterns.embeddings.json", std::ios::trunc);
        side << json{{"dimension", dim}, {"vectors", vectors}}.dump() << "\n";
    } else {
        std::filesystem::remove(dir / "patterns.embeddings.json");
    }
}

PatternStore PatternStore::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "patterns.json");
    if (!in) throw PatternError("cannot read " + (dir / "patterns.json").string());
    json arr;
    try {
        arr = json::parse(in);
    } catch (const json::parse_error& e) {
        throw PatternError(std::string("malformed patterns.json: ") + e.what());
    }
    if (!arr.is_array()) throw PatternError("patterns.json must hold a JSON array");
    std::vector<ThoughtPattern> patterns;
    for (const auto& v : arr) patterns.push_back(ThoughtPattern::from_json(v));
    if (std::ifstream side(dir / "patterns.embeddings.json"); side) {
        try {
            auto sidecar = json::parse(side);
            const auto& vectors = sidecar.at("vectors");
            for (auto& p : patterns) {
                if (auto it = vectors.find(p.id); it != vectors.end()) p.embedding = it->get<std::vector<float>>();
            }
        } catch (const json::exception& e) {
            throw PatternError(std::string("malformed embeddings sidecar: ") + e.what());
        }
    }
    return PatternStore(std::move(patterns));
}

namespace {

double jaccard(const std::unordered_set<std::string>& a, const std::unordered_set<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

std::vector<std::pair<std::string, double>> rank_patterns(const std::string& query, const PatternStore& store,
                                                          std::size_t k, const EmbeddingProvider* provider) {
    auto snap = store.snapshot();
    bool dense = provider != nullptr && !snap->empty();
    if (dense) {
        dense = std::all_of(snap->begin(), snap->end(),
                            [&](const ThoughtPattern& p) { return p.embedding.size() == provider->dimension(); });
    }
    std::vector<std::pair<std::string, double>> scored;
    if (dense) {
        auto qv = provider->embed(query);
        for (const auto& p : *snap) scored.emplace_back(p.id, kernels::cosine(qv, p.embedding));
    } else {
        auto qt = text::token_set(query);
        for (const auto& p : *snap) scored.emplace_back(p.id, jaccard(qt, text::token_set(p.task_description)));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

MatchResult match_pattern(const std::string& query, const PatternStore& store, std::size_t k, LlmClient& llm,
                          const EmbeddingProvider* provider) {
    if (k == 0) throw PatternError("K must be positive");
    MatchResult result;
    auto snap = store.snapshot();
    if (snap->empty()) return result;
    result.candidates = rank_patterns(query, store, k, provider);

    std::vector<std::pair<std::string, std::string>> shown;
    for (const auto& [id, score] : result.candidates) {
        auto it = std::find_if(snap->begin(), snap->end(), [&](const ThoughtPattern& p) { return p.id == id; });
        shown.emplace_back(id, it->task_description);
    }
    auto req = ChatRequest::make(CallTag::Match, prompts::match_system(), prompts::match_user(query, shown));
    auto reply = llm.complete_json(req, [](const json& v) {
        auto it = v.find("selected");
        return it != v.end() && (it->is_string() || it->is_null());
    });
    const auto& selected = reply.at("selected");
    const std::string choice = selected.is_string() ? selected.get<std::string>() : "none";
    bool known = std::any_of(result.candidates.begin(), result.candidates.end(),
                             [&](const auto& c) { return c.first == choice; });
    if (known) {
        result.outcome = MatchResult::Outcome::Matched;
        result.pattern_id = choice;
        return result;
    }
    if (choice != "none" && !choice.empty())
        spdlog::warn("selector named '{}' which is not a candidate; treating the task as novel", choice);
    for (const auto& c : result.candidates) result.nearest_ids.push_back(c.first);
    return result;
}

namespace {

std::optional<std::string> field(const json& v, const char* spaced, const char* snake) {
    for (const char* key : {spaced, snake}) {
        if (auto it = v.find(key); it != v.end() && it->is_string() && !text::trim(it->get<std::string>()).empty())
            return text::trim(it->get<std::string>());
    }
    return std::nullopt;
}

std::string render_old(const ThoughtPattern& p) {
    return "{\"task description\": \"" + p.task_description + "\", \"solution description\": \"" +
           p.solution_description + "\", \"thought template\": \"" + p.thought_template + "\"}";
}

}  // namespace

ThoughtPattern distill(const std::optional<Trajectory>& route, const std::optional<std::string>& expert_opinion,
                       const std::optional<ThoughtPattern>& old, LlmClient& llm) {
    const bool has_route = route && (!route->history.empty() || !route->react_steps.empty());
    const bool has_opinion = expert_opinion && !text::trim(*expert_opinion).empty();
    if (!has_route && !has_opinion) throw PatternError("distillation needs a task route or an expert opinion");

    PatternSource source;
    if (!has_route) {
        source = PatternSource::ExpertDirect;
    } else if (has_opinion) {
        source = PatternSource::AgentFailedExpertCorrected;
    } else if (route->succeeded()) {
        source = PatternSource::AgentSuccess;
    } else {
        throw PatternError("a failed route can only be distilled together with an expert correction");
    }

    auto req = ChatRequest::make(
        CallTag::Distill, prompts::distill_system(),
        prompts::distill_user(old ? render_old(*old) : "none", has_route ? route->render_route() : "none",
                              has_opinion ? *expert_opinion : "none"));
    auto reply = llm.complete_json(req, [](const json& v) {
        return field(v, "task description", "task_description") &&
               field(v, "solution description", "solution_description") &&
               field(v, "thought template", "thought_template");
    });

    ThoughtPattern p;
    p.id = old ? old->id : "";
    p.task_description = *field(reply, "task description", "task_description");
    p.solution_description = *field(reply, "solution description", "solution_description");
    p.thought_template = *field(reply, "thought template", "thought_template");
    p.source = source;
    if (old && old->scenario_tag != "untagged") {
        p.scenario_tag = old->scenario_tag;
    } else if (has_route && !route->scenario_tag.empty()) {
        p.scenario_tag = route->scenario_tag;
    }
    p.validate();
    return p;
}

}  // namespace taira
