#pragma once

#include "taira/catalog.hpp"
#include "taira/history.hpp"
#include "taira/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taira {

class LlmClient;

struct SearchResult {
    std::string title;
    std::string snippet;
    bool operator==(const SearchResult&) const = default;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<SearchResult> search(std::string_view query) const = 0;
};

// Fixture corpus: JSONL of {pattern, results: [{title, snippet}]}. An entry
// fires when its pattern occurs in the query (case-insensitive); longer
// patterns come first, duplicates are dropped.
class OfflineSearchClient : public SearchClient {
public:
    struct Entry {
        std::string pattern;
        std::vector<SearchResult> results;
    };

    explicit OfflineSearchClient(std::vector<Entry> entries);
    static OfflineSearchClient from_file(const std::filesystem::path& path);
    static OfflineSearchClient from_stream(std::istream& in);

    std::vector<SearchResult> search(std::string_view query) const override;
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

struct PreferenceParse {
    static constexpr std::size_t kMaxWords = 15;

    std::string item_type;
    std::vector<std::string> preferences;

    std::size_t word_count() const;
    // "[type]; [preference words]". Brackets optional; throws ExecutorError
    // on an empty type. Preferences are dropped from the end past kMaxWords.
    static PreferenceParse parse(std::string_view reply);
};

struct RecommendationList {
    std::string label;  // at most 5 words
    std::vector<std::pair<std::string, std::string>> items;  // (id, title)
};

struct RecommendationResponse {
    static constexpr std::size_t kListSize = 10;
    static constexpr std::size_t kMaxLabelWords = 5;

    std::vector<RecommendationList> lists;

    // Empty when valid, otherwise the first violated rule.
    std::string violation() const;
    std::vector<std::string> item_ids() const;
    nlohmann::json to_json() const;
    static RecommendationResponse from_json(const nlohmann::json& value);
};

// Shared, read-only dependencies of the executor agents.
struct ExecutorContext {
    const Catalog& catalog;
    const Retriever& retriever;
    const SearchClient& search;
    const EmbeddingProvider* map_provider = nullptr;  // cosine fallback for attribute mapping
    std::string domain_noun = "clothing";
    std::size_t candidate_pool = Retriever::kDefaultCandidatePool;
    std::size_t attributes_per_search = 5;
};

inline constexpr std::size_t kSearchSummaryWords = 20;

// Search -> summarize (<= 20 words) -> map onto the vocabulary. Output is
// always a subset of the vocabulary.
std::vector<std::string> searcher(std::string_view query, const ExecutorContext& ctx, LlmClient& llm);

// Preference parse -> candidate pool by item type -> reorder by matched
// preference terms (stable) -> top n. Throws ExecutorError when nothing matches.
RankedList item_retriever(std::string_view request, const ExecutorContext& ctx, LlmClient& llm, std::size_t n = 10);

// Preference-term reorder of a base ranking; scores encode the new order.
RankedList reorder_by_preferences(const RankedList& base, const std::vector<std::string>& preferences,
                                  const Catalog& catalog, std::size_t n);

// Turns a subtask plus history into the next executor's input.
std::string interpret(std::string_view content, const TaskHistory& history, std::string_view next_agent,
                      LlmClient& llm, bool include_planner = true);

// Final multi-list response. Item ids must come from the history's retrieval
// outputs; one corrective re-prompt is allowed before ExecutorError.
RecommendationResponse interactor(const TaskHistory& history, std::string_view instruction, const Catalog& catalog,
                                  LlmClient& llm);

std::string render_ranked_items(const RankedList& list, const Catalog& catalog);

}  // namespace taira
