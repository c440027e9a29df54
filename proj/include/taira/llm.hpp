#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taira {

// Fixed set of call sites; every request and ledger row is labelled by one.
enum class CallTag {
    Plan,
    Replan,
    Match,
    Distill,
    Searcher,
    RetrieverPrefs,
    Interpreter,
    Interactor,
    Simulator,
    QueryGen,
};

inline constexpr std::size_t kCallTagCount = 10;
inline constexpr std::array<CallTag, kCallTagCount> kAllCallTags = {
    CallTag::Plan,        CallTag::Replan,      CallTag::Match,      CallTag::Distill,
    CallTag::Searcher,    CallTag::RetrieverPrefs, CallTag::Interpreter, CallTag::Interactor,
    CallTag::Simulator,   CallTag::QueryGen};

std::string_view tag_name(CallTag tag);
CallTag parse_tag(std::string_view name);  // throws LlmError("unknown tag ...")
double default_temperature(CallTag tag);

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    CallTag tag = CallTag::Plan;

    static ChatRequest make(CallTag tag, std::string system_prompt, std::string user_prompt);
    void validate() const;
    std::string combined() const { return system_prompt + "\n" + user_prompt; }
};

struct ChatReply {
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    // Provider-reported latency; measured wall clock is used when absent.
    std::optional<std::chrono::microseconds> latency;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatReply complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct TagCounters {
    std::int64_t calls = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_us = 0;

    TagCounters& operator+=(const TagCounters& o);
    bool operator==(const TagCounters&) const = default;
};

struct LedgerSnapshot {
    std::array<TagCounters, kCallTagCount> per_tag{};

    const TagCounters& operator[](CallTag tag) const { return per_tag[static_cast<std::size_t>(tag)]; }
    TagCounters total() const;
    LedgerSnapshot& operator+=(const LedgerSnapshot& o);
    bool operator==(const LedgerSnapshot&) const = default;

    nlohmann::json to_json(bool include_latency = true) const;
};

// Thread-safe per-tag counters of calls, tokens and latency.
class TokenLedger {
public:
    void record(CallTag tag, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                std::chrono::microseconds latency);
    void record(std::string_view tag, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                std::chrono::microseconds latency);
    void merge(const LedgerSnapshot& other);

    LedgerSnapshot snapshot() const;
    TagCounters tag(CallTag tag) const;
    TagCounters total() const;

private:
    mutable std::mutex mu_;
    LedgerSnapshot counters_;
};

// Appended on every JSON re-prompt.
inline constexpr std::string_view kJsonOnlySuffix =
    "\n\nYour previous reply could not be used. Return only the JSON object, with no other text.";

// First balanced {...} in text that parses as JSON; tolerates code fences and
// surrounding prose. Never throws.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

using SchemaCheck = std::function<bool(const nlohmann::json&)>;

// Binds a provider to a ledger. Cheap to construct per session.
class LlmClient {
public:
    static constexpr int kDefaultRepromptBudget = 2;

    LlmClient(ChatProvider& provider, TokenLedger& ledger, int reprompt_budget = kDefaultRepromptBudget)
        : provider_(provider), ledger_(ledger), reprompt_budget_(reprompt_budget) {}

    std::string complete(const ChatRequest& request);

    // Re-prompts up to reprompt_budget times with kJsonOnlySuffix, then throws
    // MalformedOutput carrying the last raw completion.
    nlohmann::json complete_json(const ChatRequest& request, const SchemaCheck& schema_check);

    ChatProvider& provider() { return provider_; }
    TokenLedger& ledger() { return ledger_; }
    int reprompt_budget() const { return reprompt_budget_; }

private:
    ChatProvider& provider_;
    TokenLedger& ledger_;
    int reprompt_budget_;
};

// Rule-driven deterministic backend. A rule fires when its tag matches, every
// `contains` string occurs in the prompt, no `not_contains` string does, and
// (if set) the per-tag call index equals `call_index`. First matching rule
// wins; otherwise the offline responder answers when enabled.
struct ScriptRule {
    CallTag tag = CallTag::Plan;
    std::vector<std::string> contains;
    std::vector<std::string> not_contains;
    std::optional<int> call_index;
    std::string reply;
};

class ScriptedProvider : public ChatProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptRule> rules = {}, bool offline_fallback = true);

    // {"rules": [{tag, contains?, not_contains?, call_index?, reply | reply_json}],
    //  "fallback": "offline" | "none"}
    static std::unique_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);
    static std::unique_ptr<ScriptedProvider> from_json(const nlohmann::json& fixture);

    void add_rule(ScriptRule rule);
    ChatReply complete(const ChatRequest& request) override;
    std::string name() const override { return "scripted"; }

    int calls(CallTag tag) const;

private:
    mutable std::mutex mu_;
    std::vector<ScriptRule> rules_;
    bool offline_fallback_;
    std::array<int, kCallTagCount> call_counts_{};
};

// Records every request then forwards it. Used for prompt inspection.
class RecordingProvider : public ChatProvider {
public:
    explicit RecordingProvider(ChatProvider& inner) : inner_(inner) {}

    ChatReply complete(const ChatRequest& request) override;
    std::string name() const override { return inner_.name(); }

    std::vector<ChatRequest> requests() const;
    std::vector<ChatRequest> requests(CallTag tag) const;

private:
    ChatProvider& inner_;
    mutable std::mutex mu_;
    std::vector<ChatRequest> log_;
};

struct HttpProviderConfig {
    std::string base_url;  // e.g. https://api.openai.com
    std::string model;
    std::string api_key;   // TAIRA_API_KEY
    std::chrono::seconds timeout{60};
    int transport_retries = 3;
    std::chrono::milliseconds backoff{250};
};

// POST <base_url>/v1/chat/completions, retrying 429/5xx/transport failures with
// exponential backoff.
class HttpProvider : public ChatProvider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    ChatReply complete(const ChatRequest& request) override;
    std::string name() const override { return "http"; }

    static nlohmann::json request_body(const HttpProviderConfig& config, const ChatRequest& request);
    static ChatReply parse_response(const std::string& body);

private:
    HttpProviderConfig config_;
};

// Deterministic stand-in for the chat model, answering each call site from
// the structure of its prompt. Backs ScriptedProvider when no rule matches.
std::string offline_respond(const ChatRequest& request);

}  // namespace taira
