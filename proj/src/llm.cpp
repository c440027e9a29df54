#include "taira/llm.hpp"

#include "taira/errors.hpp"
#include "taira/text.hpp"

#include <spdlog/spdlog.h>

#include <fstream>

namespace taira {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kCallTagCount> kTagNames = {
    "plan",     "replan",          "match",       "distill",    "searcher",
    "retriever_prefs", "interpreter", "interactor", "simulator", "query_gen"};

}  // namespace

std::string_view tag_name(CallTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

CallTag parse_tag(std::string_view name) {
    for (std::size_t i = 0; i < kTagNames.size(); ++i) {
        if (kTagNames[i] == name) return static_cast<CallTag>(i);
    }
    throw LlmError("unknown tag '" + std::string(name) + "'");
}

double default_temperature(CallTag tag) { return tag == CallTag::QueryGen ? 0.7 : 0.0; }

ChatRequest ChatRequest::make(CallTag tag, std::string system_prompt, std::string user_prompt) {
    ChatRequest r;
    r.tag = tag;
    r.system_prompt = std::move(system_prompt);
    r.user_prompt = std::move(user_prompt);
    r.temperature = default_temperature(tag);
    return r;
}

void ChatRequest::validate() const {
    if (text::trim(system_prompt).empty() || text::trim(user_prompt).empty())
        throw LlmError("empty prompt for call site '" + std::string(tag_name(tag)) + "'");
    if (temperature < 0.0 || temperature > 1.0) throw LlmError("temperature outside [0,1]");
    if (max_tokens <= 0) throw LlmError("max_tokens must be positive");
}

TagCounters& TagCounters::operator+=(const TagCounters& o) {
    calls += o.calls;
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    latency_us += o.latency_us;
    return *this;
}

TagCounters LedgerSnapshot::total() const {
    TagCounters t;
    for (const auto& c : per_tag) t += c;
    return t;
}

LedgerSnapshot& LedgerSnapshot::operator+=(const LedgerSnapshot& o) {
    for (std::size_t i = 0; i < kCallTagCount; ++i) per_tag[i] += o.per_tag[i];
    return *this;
}

json LedgerSnapshot::to_json(bool include_latency) const {
    auto row = [&](const TagCounters& c) {
        json j = {{"calls", c.calls}, {"prompt_tokens", c.prompt_tokens}, {"completion_tokens", c.completion_tokens}};
        if (include_latency) j["latency_us"] = c.latency_us;
        return j;
    };
    json tags = json::object();
    for (auto tag : kAllCallTags) tags[std::string(tag_name(tag))] = row((*this)[tag]);
    return {{"per_tag", tags}, {"total", row(total())}};
}

void TokenLedger::record(CallTag tag, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                         std::chrono::microseconds latency) {
    if (prompt_tokens < 0 || completion_tokens < 0 || latency.count() < 0)
        throw LlmError("ledger counts must be non-negative");
    std::lock_guard lock(mu_);
    auto& c = counters_.per_tag[static_cast<std::size_t>(tag)];
    c.calls += 1;
    c.prompt_tokens += prompt_tokens;
    c.completion_tokens += completion_tokens;
    c.latency_us += latency.count();
}

void TokenLedger::record(std::string_view tag, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                         std::chrono::microseconds latency) {
    record(parse_tag(tag), prompt_tokens, completion_tokens, latency);
}

void TokenLedger::merge(const LedgerSnapshot& other) {
    std::lock_guard lock(mu_);
    counters_ += other;
}

LedgerSnapshot TokenLedger::snapshot() const {
    std::lock_guard lock(mu_);
    return counters_;
}

TagCounters TokenLedger::tag(CallTag tag) const {
    std::lock_guard lock(mu_);
    return counters_[tag];
}

TagCounters TokenLedger::total() const { return snapshot().total(); }

std::optional<json> extract_json_object(std::string_view text) {
    for (std::size_t start = text.find('{'); start != std::string_view::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

std::string LlmClient::complete(const ChatRequest& request) {
    request.validate();
    auto started = std::chrono::steady_clock::now();
    ChatReply reply = provider_.complete(request);
    auto measured = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
    ledger_.record(request.tag, reply.prompt_tokens.value_or(text::approx_tokens(request.combined())),
                   reply.completion_tokens.value_or(text::approx_tokens(reply.text)),
                   reply.latency.value_or(measured));
    return std::move(reply.text);
}

json LlmClient::complete_json(const ChatRequest& request, const SchemaCheck& schema_check) {
    ChatRequest attempt = request;
    std::string raw;
    for (int i = 0; i <= reprompt_budget_; ++i) {
        if (i > 0) attempt.user_prompt = request.user_prompt + std::string(kJsonOnlySuffix);
        raw = complete(attempt);
        if (auto value = extract_json_object(raw); value && schema_check(*value)) return *value;
        spdlog::debug("unusable JSON from '{}' (attempt {})", tag_name(request.tag), i + 1);
    }
    throw MalformedOutput("no valid JSON from '" + std::string(tag_name(request.tag)) + "' after " +
                              std::to_string(reprompt_budget_) + " re-prompts",
                          raw);
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules, bool offline_fallback)
    : rules_(std::move(rules)), offline_fallback_(offline_fallback) {}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_json(const json& fixture) {
    std::vector<ScriptRule> rules;
    for (const auto& r : fixture.value("rules", json::array())) {
        ScriptRule rule;
        rule.tag = parse_tag(r.at("tag").get<std::string>());
        rule.contains = r.value("contains", std::vector<std::string>{});
        rule.not_contains = r.value("not_contains", std::vector<std::string>{});
        if (r.contains("call_index")) rule.call_index = r.at("call_index").get<int>();
        if (r.contains("reply_json")) {
            rule.reply = r.at("reply_json").dump();
        } else {
            rule.reply = r.at("reply").get<std::string>();
        }
        rules.push_back(std::move(rule));
    }
    bool offline = fixture.value("fallback", std::string("offline")) == "offline";
    return std::make_unique<ScriptedProvider>(std::move(rules), offline);
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LlmError("cannot read fixture " + path.string());
    json fixture;
    try {
        fixture = json::parse(in);
    } catch (const json::parse_error& e) {
        throw LlmError("malformed fixture " + path.string() + ": " + e.what());
    }
    return from_json(fixture);
}

void ScriptedProvider::add_rule(ScriptRule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(rule));
}

int ScriptedProvider::calls(CallTag tag) const {
    std::lock_guard lock(mu_);
    return call_counts_[static_cast<std::size_t>(tag)];
}

ChatReply ScriptedProvider::complete(const ChatRequest& request) {
    const std::string prompt = request.combined();
    const ScriptRule* hit = nullptr;
    {
        std::lock_guard lock(mu_);
        int index = call_counts_[static_cast<std::size_t>(request.tag)]++;
        for (const auto& rule : rules_) {
            if (rule.tag != request.tag) continue;
            if (rule.call_index && *rule.call_index != index) continue;
            bool ok = true;
            for (const auto& s : rule.contains) ok = ok && prompt.find(s) != std::string::npos;
            for (const auto& s : rule.not_contains) ok = ok && prompt.find(s) == std::string::npos;
            if (ok) {
                hit = &rule;
                break;
            }
        }
    }
    ChatReply reply;
    reply.latency = std::chrono::microseconds(0);
    if (hit) {
        reply.text = hit->reply;
    } else if (offline_fallback_) {
        reply.text = offline_respond(request);
    } else {
        throw LlmError("no scripted reply for call site '" + std::string(tag_name(request.tag)) + "'");
    }
    return reply;
}

ChatReply RecordingProvider::complete(const ChatRequest& request) {
    {
        std::lock_guard lock(mu_);
        log_.push_back(request);
    }
    return inner_.complete(request);
}

std::vector<ChatRequest> RecordingProvider::requests() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::vector<ChatRequest> RecordingProvider::requests(CallTag tag) const {
    std::lock_guard lock(mu_);
    std::vector<ChatRequest> out;
    for (const auto& r : log_) {
        if (r.tag == tag) out.push_back(r);
    }
    return out;
}

}  // namespace taira
