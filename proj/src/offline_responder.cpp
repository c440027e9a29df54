// Deterministic stand-in for the chat model. Each call site is answered from
// the structure of its prompt (the anchors in prompts.hpp), so end-to-end runs
// work without network access and are reproducible bit for bit.
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <regex>
#include <set>

namespace taira {

namespace {

using nlohmann::json;
namespace p = prompts;

bool has_word_prefix(const std::string& lower, std::string_view cue) {
    for (auto pos = lower.find(cue); pos != std::string::npos; pos = lower.find(cue, pos + 1)) {
        if (pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]))) return true;
    }
    return false;
}

bool any_cue(const std::string& lower, std::initializer_list<std::string_view> cues) {
    return std::any_of(cues.begin(), cues.end(), [&](std::string_view c) { return has_word_prefix(lower, c); });
}

// Scenario of a query or a task description, by cue phrases.
std::string classify(std::string_view s) {
    const std::string t = text::to_lower(s);
    if (any_cue(t, {"not sure", "not clear", "unsure", "ambiguous"})) return "ambiguous";
    if (any_cue(t, {"also looking for", "different occasions", "another occasion"})) return "multi_occasions";
    if (any_cue(t, {"go with", "match", "pair"})) return "matching";
    if (any_cue(t, {"set of", "bundle", "outfit"})) return "bundle";
    if (any_cue(t, {"different styles", "different types"})) return "multi_types";
    if (any_cue(t, {"usage requirement", "suitable for", "occasion", "gathering", "party", "wedding", "beach",
                    "office", "hiking", "travel", "date night", "workout"}))
        return "occasions";
    return "direct_reference";
}

const std::vector<std::string>& product_nouns() {
    static const std::vector<std::string> nouns = {
        "t-shirt", "blouse", "shirt", "dress", "skirt", "trousers", "pants", "jeans", "shorts", "leggings",
        "jacket", "coat", "cardigan", "sweater", "hoodie", "sandals", "sneakers", "boots", "heels", "shoes",
        "scarf", "hat", "bag", "pajama", "swimsuit", "socks"};
    return nouns;
}

// Product nouns in order of first appearance, singular-folded, at most two.
std::vector<std::string> named_products(std::string_view s) {
    const std::string t = text::to_lower(s);
    std::vector<std::pair<std::size_t, std::string>> found;
    for (const auto& noun : product_nouns()) {
        for (auto pos = t.find(noun); pos != std::string::npos; pos = t.find(noun, pos + 1)) {
            bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(t[pos - 1]));
            // "shirt" inside "t-shirt" is the same product
            if (left && pos > 0 && t[pos - 1] == '-') left = false;
            if (!left) continue;
            std::size_t end = pos + noun.size();
            std::string word = noun;
            if (end < t.size() && t[end] == 's') word += "s";
            if (std::none_of(found.begin(), found.end(), [&](const auto& f) { return f.second == word; }))
                found.emplace_back(pos, word);
            break;
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& [pos, w] : found) {
        if (out.size() == 2) break;
        out.push_back(w);
    }
    return out;
}

const std::vector<std::string>& openers() {
    static const std::vector<std::string> o = {
        "can you recommend", "i am looking for", "do you have any suggestions for", "do you have any suggestions",
        "can you help me choose", "what's the best", "show me", "i need advice on choosing", "where can i find",
        "can you suggest", "could you recommend", "could you guide me to", "i want", "i need"};
    return o;
}

// Main product phrase: opener and determiners stripped, cut at the first
// clause boundary.
std::string product_phrase(std::string_view query) {
    std::string t = text::trim(text::to_lower(query));
    for (const auto& o : openers()) {
        if (t.rfind(o, 0) == 0) {
            t = text::trim(t.substr(o.size()));
            break;
        }
    }
    for (bool again = true; again;) {
        again = false;
        for (std::string_view det : {"some ", "a ", "an ", "the ", "me ", "any ", "for ", "on ", "good "}) {
            if (t.rfind(det, 0) == 0) {
                t = t.substr(det.size());
                again = true;
            }
        }
    }
    std::size_t cut = t.size();
    for (std::string_view b : {" that ", " for ", " with ", " suitable", " to ", " in ", " and ", "?", ".", ","}) {
        auto pos = t.find(b);
        if (pos != std::string::npos) cut = std::min(cut, pos);
    }
    std::string phrase = text::trim(t.substr(0, cut));
    return phrase.empty() ? "items" : phrase;
}

// The need behind a query: what follows the product phrase, trimmed.
std::string need_phrase(std::string_view query) {
    const std::string t = text::to_lower(query);
    for (std::string_view lead : {" for ", " suitable for ", " with "}) {
        auto pos = t.find(lead);
        if (pos == std::string::npos) continue;
        std::string rest = t.substr(pos + 1);
        auto end = rest.find_first_of("?.");
        return text::trim(rest.substr(0, end));
    }
    return {};
}

std::string quoted_input(std::string_view prompt) {
    return p::between(prompt, p::kUserInputLead, std::string(p::kQuotedEnd) + "\n");
}

json subtask(std::string content, std::string_view agent) {
    return {{"content", std::move(content)}, {"agent", std::string(agent)}};
}

json plan_json(const std::string& input, const std::string& main_task, const std::vector<json>& tasks) {
    json subs = json::object();
    for (std::size_t i = 0; i < tasks.size(); ++i) subs["task_" + std::to_string(i + 1)] = tasks[i];
    return {{"user_input", input}, {"main_task", main_task}, {"sub_tasks", subs}};
}

std::string with_plural(const std::string& product) {
    if (product.size() > 1 && product.ends_with("ss")) return product + "es";
    if (product.empty() || product.back() == 's') return product;
    return product + "s";
}

// Single-shot plan: one search + retrieval per named target, Interactor last.
json single_plan(const std::string& input) {
    const std::string scenario = classify(input);
    auto targets = named_products(input);
    if (targets.empty()) targets.push_back(product_phrase(input));
    if (scenario == "direct_reference") {
        std::vector<json> tasks;
        std::string need = need_phrase(input);
        tasks.push_back(subtask("Retrieve " + with_plural(targets[0]) + " with attributes" +
                                    (need.empty() ? std::string() : ": " + need),
                                "ItemRetrievalAgent"));
        tasks.push_back(subtask("Recommend the retrieved items to the user.", "InteractorAgent"));
        return plan_json(input, "Recommend " + with_plural(targets[0]) + " matching the described attributes", tasks);
    }
    std::string need = need_phrase(input);
    if (need.empty()) need = "the user's needs";
    std::vector<json> tasks;
    for (const auto& t : targets) tasks.push_back(subtask("Search for attributes of " + t + " " + need + ".", "SearcherAgent"));
    for (const auto& t : targets)
        tasks.push_back(subtask("Retrieve " + with_plural(t) + " with attributes found for " + need + ".", "ItemRetrievalAgent"));
    tasks.push_back(subtask("Recommend each retrieved list to the user.", "InteractorAgent"));
    return plan_json(input, "Recommend items for: " + input, tasks);
}

bool phased_guidance(std::string_view prompt) {
    const std::string t = text::to_lower(prompt);
    return t.find("phase 1") != std::string::npos || t.find("first collect information") != std::string::npos;
}

std::string respond_plan(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string input = quoted_input(u);
    const bool planner = u.find(p::kPlannerAgentLine) != std::string::npos;
    if (planner && phased_guidance(u)) {
        const std::string product = named_products(input).empty() ? product_phrase(input) : named_products(input)[0];
        std::string need = need_phrase(input);
        if (need.empty()) need = "the user's request";
        std::vector<json> tasks{
            subtask("Search for different types of " + need + " and the suitable " + product + " styles for each.",
                    "SearcherAgent"),
            subtask("Generate a recommendation plan for the " + product + " types found.", "PlannerAgent")};
        return plan_json(input, "Generate an initial plan for obtaining information", tasks).dump();
    }
    return single_plan(input).dump();
}

struct HistoryRecord {
    std::string agent;
    std::string content;
    std::string input;
    std::string output;
};

// Parses TaskHistory::render() text.
std::vector<HistoryRecord> parse_history(std::string_view rendered) {
    static const std::regex head(R"(^Task(\d+)\[(\w+)\] \(phase \d+\): (.*)$)");
    static const std::regex in(R"(^Input\d+: (.*)$)");
    static const std::regex out(R"(^Output\d+: (.*)$)");
    std::vector<HistoryRecord> records;
    bool in_output = false;
    for (const auto& line : text::split(rendered, "\n")) {
        std::smatch m;
        if (std::regex_match(line, m, head)) {
            records.push_back({m[2], m[3], {}, {}});
            in_output = false;
        } else if (!records.empty() && std::regex_match(line, m, in)) {
            records.back().input = m[1];
        } else if (!records.empty() && std::regex_match(line, m, out)) {
            records.back().output = m[1];
            in_output = true;
        } else if (in_output && !records.empty()) {
            records.back().output += "\n" + line;
        }
    }
    return records;
}

std::vector<std::string> split_attributes(const std::string& s) {
    std::vector<std::string> out;
    for (auto& a : text::split(s, ",")) {
        auto t = text::trim(a);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string respond_replan(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string input = quoted_input(u);
    const auto records = parse_history(p::between(u, p::kHistoryLead, p::kHistoryEnd));
    auto products = named_products(input);
    const std::string product = products.empty() ? product_phrase(input) : products[0];

    // Two targets: the named products when there are two, else two attribute
    // directions from the information gathered so far.
    std::vector<std::pair<std::string, std::string>> targets;  // (product, direction)
    if (products.size() >= 2) {
        for (const auto& prod : products) targets.emplace_back(prod, need_phrase(input));
    } else {
        std::vector<std::string> directions;
        for (const auto& r : records) {
            if (r.agent != "SearcherAgent") continue;
            for (const auto& a : split_attributes(r.output)) {
                if (directions.size() < 2 && std::find(directions.begin(), directions.end(), a) == directions.end())
                    directions.push_back(a);
            }
        }
        if (directions.empty()) directions.push_back(need_phrase(input));
        for (const auto& d : directions) targets.emplace_back(product, text::to_lower(d));
    }

    std::vector<json> tasks;
    std::string goal = "Generate a recommendation plan for";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        goal += (i ? " and " : " ") + with_plural(targets[i].first) + " suitable for " + targets[i].second;
    }
    if (targets.size() > 1) {
        tasks.push_back(subtask("Search for " + targets[1].first + " styles suitable for " + targets[1].second + ".",
                                "SearcherAgent"));
    }
    for (const auto& [prod, dir] : targets) {
        tasks.push_back(subtask("Retrieve items for " + with_plural(prod) + " with attributes for " + dir +
                                    ". Then Reorder based on user preference.",
                                "ItemRetrievalAgent"));
    }
    tasks.push_back(subtask("Generate the final response with one list per recommendation target.", "InteractorAgent"));
    return plan_json(input, goal, tasks).dump();
}

std::string respond_match(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string query = p::between(u, p::kQueryLead, std::string(p::kQuotedEnd) + "\n");
    const std::string want = classify(query);
    std::string current_id;
    for (const auto& line : text::split(u, "\n")) {
        if (line.rfind(p::kCandidateLead, 0) == 0) {
            current_id = text::trim(line.substr(p::kCandidateLead.size()));
        } else if (line.rfind(p::kTaskDescriptionLead, 0) == 0 && !current_id.empty()) {
            if (classify(line.substr(p::kTaskDescriptionLead.size())) == want)
                return json{{"selected", current_id}}.dump();
            current_id.clear();
        }
    }
    return json{{"selected", "none"}}.dump();
}

std::vector<std::string> sentences(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        cur += c == '\n' ? ' ' : c;
        if (c == '.') {
            if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        }
    }
    if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
    return out;
}

std::string strip_lead(std::string s, std::string_view lead) {
    if (text::starts_with_ci(s, lead)) s = text::trim(s.substr(lead.size()));
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string respond_distill(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string old = p::between(u, p::kOldPatternLead, "\n" + std::string(p::kRouteLead));
    const std::string route = p::between(u, p::kRouteLead, "\n" + std::string(p::kOpinionLead));
    const std::string opinion = text::trim(p::between(u, p::kOpinionLead, "\nThe output should align"));
    const bool has_opinion = !opinion.empty() && opinion != "none";
    const bool has_old = !old.empty() && old != "none";

    std::string task;
    if (has_old) task = p::between(old, "\"task description\": \"", "\", \"solution description\"");
    if (task.empty()) {
        const std::string basis = route != "none" ? route : opinion;
        const std::string scenario = classify(basis);
        static const std::map<std::string, std::string> kind = {
            {"ambiguous", "puts forward a requirement but is not clear about the specific using scene, and asks for "
                          "a specific type of product"},
            {"matching", "names one product type and asks for other products that match it"},
            {"bundle", "asks for a set of products that together meet one demand"},
            {"multi_types", "asks for products of different types, each with its own requirement"},
            {"multi_occasions", "asks for a product for one occasion and is also looking for products for another"},
            {"occasions", "puts forward one usage requirement and specifies one product type"},
            {"direct_reference", "directly describes the product type and the attributes wanted"}};
        task = "In this conversational recommendation query, the user " + kind.at(scenario) + ".";
    }

    std::string solution;
    std::string tmpl;
    if (has_opinion) {
        std::string first, then;
        for (const auto& s : sentences(opinion)) {
            if (first.empty() && text::starts_with_ci(s, "first")) first = strip_lead(s, "first,");
            if (then.empty() && text::starts_with_ci(s, "then")) then = strip_lead(s, "then,");
        }
        solution = text::join(sentences(opinion), " ");
        if (!first.empty() && !then.empty()) {
            tmpl = "Phase 1: " + first + "\nStep 1: Determine the user's needs.\nStep 2: Based on the need, obtain "
                   "relevant knowledge through searcherAgent.\nStep 3: Based on the knowledge, divide the need into "
                   "specific directions and update the plan.\nPhase 2: " + then +
                   "\nStep 1: For each direction, obtain its item attributes through searcherAgent when unclear.\n"
                   "Step 2: Use the obtained attributes to retrieve items in ItemRetriever.\nStep 3: Recommend each "
                   "final list to the user.";
        }
    }
    if (tmpl.empty()) {
        std::vector<std::string> steps{"Determine the user's target products and needs."};
        static const std::regex agent_re(R"(Task\d+\[(\w+)\])");
        std::set<std::string> seen;
        for (auto it = std::sregex_iterator(route.begin(), route.end(), agent_re); it != std::sregex_iterator(); ++it) {
            const std::string agent = (*it)[1];
            if (!seen.insert(agent).second) continue;
            if (agent == "SearcherAgent") steps.push_back("Obtain the item attributes through searcherAgent.");
            if (agent == "ItemRetrievalAgent") steps.push_back("Use the obtained attributes to retrieve items in ItemRetriever.");
            if (agent == "PlannerAgent") steps.push_back("Update the plan for each recommendation target.");
        }
        steps.push_back("Recommend the retrieved items to the user.");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            tmpl += (i ? "\n" : "") + std::string("Step ") + std::to_string(i + 1) + ": " + steps[i];
        }
        if (solution.empty()) {
            solution = "Search for the item attributes the request needs when they are unclear, retrieve items with "
                       "those attributes, and recommend the retrieved lists.";
        }
    }
    return json{{"task description", task}, {"solution description", solution}, {"thought template", tmpl}}.dump();
}

std::string respond_searcher(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string query = p::between(u, p::kSearchQueryLead, ".\n" + std::string(p::kSearchResultsLead));
    std::string results = p::between(u, p::kSearchResultsLead, p::kSearchResultsEnd);
    static const std::regex marker(R"(\[\d+\])");
    results = std::regex_replace(results, marker, " ");

    std::vector<std::string> keywords;
    std::set<std::string> seen;
    for (auto w : text::words(results)) {
        w = text::to_lower(w);
        while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
        while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.front()))) w.erase(w.begin());
        auto toks = text::tokenize(w);
        if (toks.empty()) continue;
        // Product nouns would map onto type attributes rather than preferences.
        if (!named_products(w).empty()) continue;
        if (seen.insert(w).second) keywords.push_back(w);
        if (keywords.size() == 20) break;
    }
    if (keywords.empty()) return text::trim(query);
    return text::join(keywords, " ");
}

std::string respond_retriever(const ChatRequest& req) {
    const std::string request = text::trim(p::between(req.user_prompt, p::kRetrieverInputLead, p::kRetrieverInputEnd));
    static const std::regex explicit_form(R"(^Recommend (.+?) with attributes:?\s*(.*)$)", std::regex::icase);
    std::smatch m;
    std::string type;
    std::string prefs;
    if (std::regex_match(request, m, explicit_form)) {
        type = text::trim(m[1].str());
        for (const auto& a : split_attributes(m[2].str())) prefs += (prefs.empty() ? "" : " ") + a;
    } else {
        auto named = named_products(request);
        type = named.empty() ? product_phrase(request) : named[0];
        auto type_tokens = text::token_set(type);
        for (const auto& t : text::tokenize(request)) {
            if (!type_tokens.count(t)) prefs += (prefs.empty() ? "" : " ") + t;
        }
    }
    return type + "; " + prefs;
}

std::string respond_interpreter(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string content = p::between(u, p::kInterpreterContentLead, "\"\n" + std::string(p::kInterpreterAgentLead));
    const std::string agent = p::between(u, p::kInterpreterAgentLead, "\".\n");
    if (agent != "ItemRetrievalAgent") return content;

    static const std::regex explicit_attrs(R"(^Retrieve (?:items for )?(.+?) with attributes: (.+)$)");
    static const std::regex type_re(R"(Retrieve (?:items for )?(.+?) with attributes)");
    std::smatch m;
    if (std::regex_match(content, m, explicit_attrs)) return "Recommend " + m[1].str() + " with attributes: " + m[2].str();
    std::string type;
    if (std::regex_search(content, m, type_re)) {
        type = m[1].str();
    } else {
        auto named = named_products(content);
        type = named.empty() ? product_phrase(content) : with_plural(named[0]);
    }

    const auto records = parse_history(p::between(u, p::kInterpreterHistoryLead, "\n" + std::string(p::kInterpreterContentLead)));
    const auto want = text::token_set(content);
    const HistoryRecord* best = nullptr;
    std::size_t best_score = 0;
    for (const auto& r : records) {
        if (r.agent != "SearcherAgent") continue;
        std::size_t score = 0;
        for (const auto& t : text::token_set(r.output)) score += 2 * want.count(t);
        for (const auto& t : text::token_set(r.content)) score += want.count(t);
        if (!best || score > best_score) {
            best = &r;
            best_score = score;
        }
    }
    if (!best) return "Recommend " + type + " with attributes: " + text::join(text::tokenize(content), ", ");
    auto attrs = split_attributes(best->output);
    // Attributes named by the subtask win; the others belong to sibling directions.
    std::vector<std::string> named;
    for (const auto& a : attrs) {
        auto toks = text::tokenize(a);
        if (std::all_of(toks.begin(), toks.end(), [&](const auto& t) { return want.count(t) != 0; })) named.push_back(a);
    }
    if (!named.empty()) attrs = std::move(named);
    if (attrs.size() > 3) attrs.resize(3);
    return "Recommend " + type + " with attributes: " + text::join(attrs, ", ");
}

std::string respond_interactor(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const auto records = parse_history(p::between(u, "Here is the previous task history:", "\n" + std::string(p::kInteractorInstructionLead)));
    static const std::regex item_line(R"(^\d+\. \[([^\]]+)\] (.*)$)");
    static const std::regex explicit_form(R"(^Recommend (.+?) with attributes:?\s*(.*)$)");
    json lists = json::array();
    for (const auto& r : records) {
        if (r.agent != "ItemRetrievalAgent") continue;
        json items = json::array();
        for (const auto& line : text::split(r.output, "\n")) {
            std::smatch m;
            auto l = text::trim(line);
            if (std::regex_match(l, m, item_line) && items.size() < 10) items.push_back({{"id", m[1].str()}, {"title", m[2].str()}});
        }
        std::string label;
        std::smatch m;
        if (std::regex_match(r.input, m, explicit_form)) {
            auto attrs = split_attributes(m[2].str());
            label = (attrs.empty() ? std::string() : attrs[0] + " ") + m[1].str();
        } else {
            label = r.content;
        }
        lists.push_back({{"recommendation", text::first_words(label, 5)}, {"items", items}});
    }
    return "Here are the recommendations.\n" + json{{"lists", lists}}.dump();
}

std::string respond_simulator(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string query = p::between(u, p::kSimQueryLead, ".\n" + std::string(p::kSimSampleLead));
    const std::string sample = p::between(u, p::kSimSampleLead, ".\n" + std::string(p::kSimScenarioLead));
    const std::string scenario_desc = p::between(u, p::kSimScenarioLead, "\n");
    const std::string lists_text = p::between(u, p::kSimListsLead, p::kSimListsEnd);

    // The sample rendering is "title. description"; titles carry no ". ".
    const std::string sample_title = text::trim(sample.substr(0, sample.find(". ")));
    static const std::set<std::string> generic = {"recommend", "looking", "suggestion", "help",  "choose", "best",
                                                  "show",      "need",    "advice",     "choosing", "find",  "sure",
                                                  "specific",  "wearing", "scene",      "want",   "something"};
    std::set<std::string> relevant;
    for (const auto& t : text::tokenize(query + " " + sample_title)) {
        if (!generic.count(t)) relevant.insert(t);
    }

    static const std::regex item_re(R"(\[([^\]]+)\] ([^;\n]+))");
    json scores = json::array();
    std::size_t list_count = 0;
    bool any_hit = false;
    for (const auto& line : text::split(lists_text, "\n")) {
        if (line.rfind("List ", 0) != 0) continue;
        ++list_count;
        json row = json::array();
        for (auto it = std::sregex_iterator(line.begin(), line.end(), item_re); it != std::sregex_iterator(); ++it) {
            const std::string title = text::trim((*it)[2].str());
            double score = 0.0;
            if (text::to_lower(title) == text::to_lower(sample_title)) {
                score = 2.0;
            } else {
                std::size_t shared = 0;
                for (const auto& t : text::token_set(title)) shared += relevant.count(t);
                score = shared >= 2 ? 1.0 : shared == 1 ? 0.5 : 0.0;
            }
            any_hit = any_hit || score >= 1.0;
            row.push_back(score);
        }
        scores.push_back(row);
    }
    const std::string scenario = classify(scenario_desc);
    const bool multi = scenario != "direct_reference" && scenario != "occasions";
    std::string reason;
    if (list_count == 0) reason = "No recommendation list was given.";
    else if (multi && list_count < 2) reason = "The request needs more than one recommendation target.";
    else if (!any_hit) reason = "No recommended item meets the requirements.";
    const bool fail = !reason.empty();
    if (fail) {
        for (auto& row : scores) {
            for (auto& s : row) s = 0;
        }
    } else {
        reason = "The lists cover the request.";
    }
    return "Reason: " + reason + "\n" + json{{"fail", fail}, {"scores", scores}}.dump();
}

std::string line_after(std::string_view prompt, std::string_view lead) {
    return text::trim(p::between(prompt, lead, "\n"));
}

std::vector<std::string> pipe_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& part : text::split(s, " | ")) {
        if (auto t = text::trim(part); !t.empty()) out.push_back(t);
    }
    return out;
}

std::string respond_profile(const ChatRequest& req) {
    std::map<std::string, int> counts;
    std::vector<std::string> order;
    for (const auto& line : text::split(req.user_prompt, "\n")) {
        if (line.rfind(p::kProfileItemLead, 0) != 0) continue;
        auto pos = line.find(p::kGenAttributesLead);
        if (pos == std::string::npos) continue;
        for (const auto& a : pipe_list(line.substr(pos + p::kGenAttributesLead.size()))) {
            if (counts[a]++ == 0) order.push_back(a);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) { return counts[a] > counts[b]; });
    if (order.size() > 4) order.resize(4);
    if (order.empty()) return "The user has a varied shopping history.";
    return "The user often buys items that are " + text::join(order, ", ") + ".";
}

std::string article(const std::string& noun) {
    if (noun.size() > 1 && noun.back() == 's' && noun[noun.size() - 2] != 's') return "some " + noun;
    return std::string(std::string_view("aeiou").find(static_cast<char>(std::tolower(noun.empty() ? 'x' : noun[0]))) !=
                               std::string_view::npos
                           ? "an "
                           : "a ") +
           noun;
}

std::string respond_atomic(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string type = text::to_lower(line_after(u, p::kGenTypeLead));
    auto attrs = pipe_list(line_after(u, p::kGenAttributesLead));
    std::string s = "I want " + article(type);
    if (!attrs.empty()) s += " that is " + text::to_lower(attrs[0]);
    if (attrs.size() > 1) s += " and " + text::to_lower(attrs[1]);
    return s + ".";
}

std::string respond_final_query(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string scenario = line_after(u, p::kGenScenarioLead);
    const std::string opener = line_after(u, p::kGenOpenerLead);
    const std::string type = text::to_lower(line_after(u, p::kGenTypeLead));
    auto attrs = pipe_list(line_after(u, p::kGenAttributesLead));
    const unsigned seed = static_cast<unsigned>(std::stoul("0" + line_after(u, p::kGenSeedLead)));

    static const std::vector<std::string> occasions = {"a gathering with friends", "beach outings", "the office",
                                                       "a wedding", "hiking trips", "a date night", "travel"};
    static const std::vector<std::string> companions = {"skirt", "cardigan", "jeans", "sandals", "jacket", "scarf"};
    const std::string occ1 = occasions[seed % occasions.size()];
    const std::string occ2 = occasions[(seed + 3) % occasions.size()];
    std::string other = companions[seed % companions.size()];
    if (type.find(other) != std::string::npos) other = companions[(seed + 1) % companions.size()];

    std::string with;
    if (!attrs.empty()) with = " with " + text::to_lower(attrs[0]);
    if (attrs.size() > 1) with += " and " + text::to_lower(attrs[1]);
    const std::string lead = opener + (opener == "Do you have any suggestions" ? " for " : " ");
    const std::string obj = article(type);

    if (scenario == "occasions") return lead + obj + " suitable for " + occ1 + "?";
    if (scenario == "matching") return lead + obj + with + ", and " + article(other) + " to go with it?";
    if (scenario == "multi_types") return lead + obj + with + " and " + article(other) + " in different styles?";
    if (scenario == "bundle") return lead + "a set of clothes for " + occ1 + ", including " + obj + "?";
    if (scenario == "ambiguous")
        return lead + obj + " for " + occ1 + "? I'm not sure about the specific wearing scene.";
    if (scenario == "multi_occasions")
        return lead + obj + " for " + occ1 + "? I am also looking for " + article(other) + " for " + occ2 + ".";
    return lead + obj + with + "?";
}

std::string respond_react(const ChatRequest& req) {
    const std::string& u = req.user_prompt;
    const std::string query = p::between(u, p::kQueryLead, std::string(p::kQuotedEnd) + "\n");
    const std::string pad = p::between(u, p::kScratchpadLead, p::kScratchpadEnd);
    static const std::regex action_re(R"(Action\d+\[(\w+)\]: )");
    static const std::regex obs_re(R"(Observation\d+: (.*))");
    std::set<std::string> done;
    for (auto it = std::sregex_iterator(pad.begin(), pad.end(), action_re); it != std::sregex_iterator(); ++it)
        done.insert((*it)[1]);
    std::string last_obs;
    for (auto it = std::sregex_iterator(pad.begin(), pad.end(), obs_re); it != std::sregex_iterator(); ++it)
        last_obs = (*it)[1];

    auto named = named_products(query);
    const std::string product = with_plural(named.empty() ? product_phrase(query) : named[0]);
    std::string need = need_phrase(query);
    if (need.empty()) need = "the request";
    json step;
    if (!done.count("SearcherAgent") && classify(query) != "direct_reference") {
        step = {{"thought", product + " " + need + " is not a clear attribute of the item and I need to search for "
                            "information about it."},
                {"action", "SearcherAgent"},
                {"input", "Search for attributes of " + product + " " + need + "."}};
    } else if (!done.count("ItemRetrievalAgent")) {
        std::string attrs = done.count("SearcherAgent") ? last_obs : need;
        step = {{"thought", "I can retrieve items with these attributes."},
                {"action", "ItemRetrievalAgent"},
                {"input", "Recommend " + product + " with attributes: " + attrs}};
    } else {
        step = {{"thought", "The retrieved items are enough to recommend."},
                {"action", "InteractorAgent"},
                {"input", "Recommend the retrieved items."}};
    }
    return step.dump();
}

std::string respond_reflection(const ChatRequest&) {
    return "The attempt recommended a single direction although the request may need several; search for the "
           "possible directions first and give one list for each.";
}

}  // namespace

std::string offline_respond(const ChatRequest& request) {
    const std::string& u = request.user_prompt;
    switch (request.tag) {
        case CallTag::Plan:
            if (u.find(p::kScratchpadLead) != std::string::npos) return respond_react(request);
            return respond_plan(request);
        case CallTag::Replan:
            if (u.find("The user was not satisfied") != std::string::npos) return respond_reflection(request);
            return respond_replan(request);
        case CallTag::Match:
            return respond_match(request);
        case CallTag::Distill:
            return respond_distill(request);
        case CallTag::Searcher:
            return respond_searcher(request);
        case CallTag::RetrieverPrefs:
            return respond_retriever(request);
        case CallTag::Interpreter:
            return respond_interpreter(request);
        case CallTag::Interactor:
            return respond_interactor(request);
        case CallTag::Simulator:
            return respond_simulator(request);
        case CallTag::QueryGen:
            if (u.find(p::kGenAtomicLead) != std::string::npos) return respond_final_query(request);
            if (u.find(p::kGenTargetLead) != std::string::npos) return respond_atomic(request);
            return respond_profile(request);
    }
    return {};
}

}  // namespace taira
