#include "taira/executors.hpp"

#include "taira/errors.hpp"
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <set>

namespace taira {

using nlohmann::json;

OfflineSearchClient::OfflineSearchClient(std::vector<Entry> entries) : entries_(std::move(entries)) {
    for (auto& e : entries_) e.pattern = text::to_lower(e.pattern);
}

OfflineSearchClient OfflineSearchClient::from_stream(std::istream& in) {
    std::vector<Entry> entries;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            auto obj = json::parse(line);
            Entry e;
            e.pattern = obj.at("pattern");
            for (const auto& r : obj.at("results")) e.results.push_back({r.at("title"), r.value("snippet", "")});
            entries.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw ExecutorError("search corpus line " + std::to_string(n) + ": " + ex.what());
        }
    }
    return OfflineSearchClient(std::move(entries));
}

OfflineSearchClient OfflineSearchClient::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ExecutorError("cannot read search corpus " + path.string());
    return from_stream(in);
}

std::vector<SearchResult> OfflineSearchClient::search(std::string_view query) const {
    const std::string q = text::to_lower(query);
    std::vector<const Entry*> hits;
    for (const auto& e : entries_) {
        if (!e.pattern.empty() && q.find(e.pattern) != std::string::npos) hits.push_back(&e);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Entry* a, const Entry* b) { return a->pattern.size() > b->pattern.size(); });
    std::vector<SearchResult> out;
    for (const Entry* e : hits) {
        for (const auto& r : e->results) {
            if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
        }
    }
    return out;
}

std::size_t PreferenceParse::word_count() const {
    std::size_t n = text::words(item_type).size();
    for (const auto& p : preferences) n += text::words(p).size();
    return n;
}

namespace {

std::string strip_brackets(std::string s) {
    s = text::trim(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = text::trim(s.substr(1, s.size() - 2));
    return s;
}

}  // namespace

PreferenceParse PreferenceParse::parse(std::string_view reply) {
    std::string line = text::trim(reply);
    if (auto nl = line.find('\n'); nl != std::string::npos) line = text::trim(line.substr(0, nl));
    PreferenceParse p;
    auto semi = line.find(';');
    p.item_type = strip_brackets(semi == std::string::npos ? line : line.substr(0, semi));
    if (semi != std::string::npos) {
        for (auto& w : text::words(strip_brackets(line.substr(semi + 1)))) {
            std::string cleaned = strip_brackets(w);
            while (!cleaned.empty() && (cleaned.back() == ',' || cleaned.back() == '.')) cleaned.pop_back();
            if (!cleaned.empty()) p.preferences.push_back(cleaned);
        }
    }
    if (p.item_type.empty()) throw ExecutorError("preference parse has no item type: '" + line + "'");
    auto type_words = text::words(p.item_type);
    if (type_words.size() > kMaxWords) {
        type_words.resize(kMaxWords);
        p.item_type = text::join(type_words, " ");
    }
    if (p.word_count() > kMaxWords) {
        p.preferences.resize(kMaxWords - type_words.size());
        spdlog::info("preference parse truncated to {} words", kMaxWords);
    }
    return p;
}

std::string RecommendationResponse::violation() const {
    if (lists.empty()) return "the response has no recommendation list";
    for (std::size_t i = 0; i < lists.size(); ++i) {
        const auto& l = lists[i];
        const std::string which = "list " + std::to_string(i + 1);
        if (text::trim(l.label).empty()) return which + " has an empty recommendation label";
        if (text::words(l.label).size() > kMaxLabelWords) return which + " label exceeds 5 words";
        if (l.items.size() != kListSize)
            return which + " has " + std::to_string(l.items.size()) + " items instead of 10";
    }
    return {};
}

std::vector<std::string> RecommendationResponse::item_ids() const {
    std::vector<std::string> out;
    for (const auto& l : lists) {
        for (const auto& [id, title] : l.items) out.push_back(id);
    }
    return out;
}

json RecommendationResponse::to_json() const {
    json arr = json::array();
    for (const auto& l : lists) {
        json items = json::array();
        for (const auto& [id, title] : l.items) items.push_back({{"id", id}, {"title", title}});
        arr.push_back({{"recommendation", l.label}, {"items", items}});
    }
    return {{"lists", arr}};
}

RecommendationResponse RecommendationResponse::from_json(const json& value) {
    RecommendationResponse r;
    try {
        for (const auto& l : value.at("lists")) {
            RecommendationList list;
            list.label = l.at("recommendation");
            for (const auto& item : l.at("items")) {
                std::string id = item.at("id").is_string() ? item.at("id").get<std::string>() : item.at("id").dump();
                list.items.emplace_back(id, item.value("title", ""));
            }
            r.lists.push_back(std::move(list));
        }
    } catch (const json::exception& e) {
        throw ExecutorError(std::string("malformed recommendation response: ") + e.what());
    }
    return r;
}

std::vector<std::string> searcher(std::string_view query, const ExecutorContext& ctx, LlmClient& llm) {
    if (text::trim(query).empty()) throw ExecutorError("empty searcher query");
    auto results = ctx.search.search(query);
    if (results.empty()) {
        spdlog::info("no search results for '{}'; mapping the raw query", query);
        return map_attributes(query, ctx.catalog.vocab(), ctx.attributes_per_search, ctx.map_provider);
    }
    std::string context;
    for (std::size_t i = 0; i < results.size(); ++i) {
        context += "[" + std::to_string(i + 1) + "] " + results[i].title + ": " + results[i].snippet + " ";
    }
    auto req = ChatRequest::make(CallTag::Searcher, prompts::searcher_system(),
                                 prompts::searcher_user(query, text::trim(context)));
    auto summary = text::first_words(llm.complete(req), kSearchSummaryWords);
    return map_attributes(summary, ctx.catalog.vocab(), ctx.attributes_per_search, ctx.map_provider);
}

std::string render_ranked_items(const RankedList& list, const Catalog& catalog) {
    std::string out;
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        const auto& id = list.entries[i].first;
        const Item* item = catalog.find(id);
        out += "\n" + std::to_string(i + 1) + ". [" + id + "] " + (item ? item->title : std::string());
    }
    return out;
}

RankedList reorder_by_preferences(const RankedList& base, const std::vector<std::string>& preferences,
                                  const Catalog& catalog, std::size_t n) {
    std::set<std::string> pref_tokens;
    for (const auto& p : preferences) {
        for (auto& t : text::tokenize(p)) pref_tokens.insert(t);
    }
    double max_base = 0.0;
    for (const auto& e : base.entries) max_base = std::max(max_base, e.second);

    struct Row {
        std::string id;
        std::size_t matched;
        double base;
    };
    std::vector<Row> rows;
    for (const auto& [id, score] : base.entries) {
        auto doc = text::token_set(item_document(catalog.at(id)));
        std::size_t matched = 0;
        for (const auto& t : pref_tokens) matched += doc.count(t);
        rows.push_back({id, matched, score});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.matched > b.matched; });
    RankedList out;
    out.query_terms = base.query_terms;
    out.query_terms.insert(out.query_terms.end(), preferences.begin(), preferences.end());
    for (std::size_t i = 0; i < std::min(n, rows.size()); ++i) {
        // Whole part: matched preference terms; fraction: base relevance.
        out.entries.emplace_back(rows[i].id, static_cast<double>(rows[i].matched) + rows[i].base / (max_base + 1.0));
    }
    return out;
}

RankedList item_retriever(std::string_view request, const ExecutorContext& ctx, LlmClient& llm, std::size_t n) {
    if (text::trim(request).empty()) throw ExecutorError("empty retrieval request");
    if (n == 0) throw ExecutorError("n must be positive");
    auto req = ChatRequest::make(CallTag::RetrieverPrefs, prompts::retriever_system(),
                                 prompts::retriever_user(request, ctx.domain_noun));
    auto parse = PreferenceParse::parse(llm.complete(req));

    RankedList base = ctx.retriever.rank({parse.item_type}, ctx.candidate_pool);
    if (base.empty() && !parse.preferences.empty()) {
        std::vector<std::string> widened{parse.item_type};
        widened.insert(widened.end(), parse.preferences.begin(), parse.preferences.end());
        base = ctx.retriever.rank(widened, ctx.candidate_pool);
    }
    if (base.empty()) throw ExecutorError("no candidate items for '" + parse.item_type + "'");
    return reorder_by_preferences(base, parse.preferences, ctx.catalog, n);
}

std::string interpret(std::string_view content, const TaskHistory& history, std::string_view next_agent,
                      LlmClient& llm, bool include_planner) {
    auto agent = parse_agent(next_agent);
    if (!agent || *agent == AgentKind::TaskInterpreter) throw ExecutorError("unknown next agent '" + std::string(next_agent) + "'");
    const std::string previous = history.empty() ? "none" : history.records().back().output;
    auto req = ChatRequest::make(
        CallTag::Interpreter, prompts::interpreter_system(),
        prompts::interpreter_user(include_planner, history.render(), content, next_agent, previous));
    std::string out = text::trim(llm.complete(req));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = text::trim(out.substr(1, out.size() - 2));
    if (out.empty()) throw MalformedOutput("empty interpreter output", out);
    return out;
}

namespace {

bool response_shape_ok(const json& v) {
    auto lists = v.find("lists");
    if (lists == v.end() || !lists->is_array() || lists->empty()) return false;
    for (const auto& l : *lists) {
        if (!l.is_object() || !l.contains("recommendation") || !l["recommendation"].is_string()) return false;
        if (!l.contains("items") || !l["items"].is_array()) return false;
        for (const auto& item : l["items"]) {
            if (!item.is_object() || !item.contains("id")) return false;
        }
    }
    return true;
}

std::string grounding_violation(const RecommendationResponse& r, const TaskHistory& history) {
    if (auto v = r.violation(); !v.empty()) return v;
    for (const auto& id : r.item_ids()) {
        if (!history.contains_item(id)) return "item '" + id + "' does not appear in any retrieval output";
    }
    return {};
}

}  // namespace

RecommendationResponse interactor(const TaskHistory& history, std::string_view instruction, const Catalog& catalog,
                                  LlmClient& llm) {
    if (!history.has_retrieval()) throw ExecutorError("interactor needs at least one retrieval output in the history");
    auto base = ChatRequest::make(CallTag::Interactor, prompts::interactor_system(),
                                  prompts::interactor_user(history.render(), instruction));
    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatRequest req = base;
        if (attempt > 0) {
            req.user_prompt += "\n\nYour previous response was rejected: " + problem +
                               ". Use only items listed in the task history and output exactly 10 items per list.";
        }
        auto value = llm.complete_json(req, response_shape_ok);
        auto response = RecommendationResponse::from_json(value);
        for (auto& list : response.lists) {
            auto label_words = text::words(list.label);
            if (label_words.size() > RecommendationResponse::kMaxLabelWords) {
                label_words.resize(RecommendationResponse::kMaxLabelWords);
                list.label = text::join(label_words, " ");
            }
            for (auto& [id, title] : list.items) {
                if (const Item* item = catalog.find(id)) title = item->title;
            }
        }
        problem = grounding_violation(response, history);
        if (problem.empty()) return response;
        spdlog::info("interactor response rejected: {}", problem);
    }
    throw ExecutorError("interactor response rejected after re-prompt: " + problem);
}

}  // namespace taira
