#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace taira {

class LlmClient;

struct Item {
    std::string id;
    std::string title;
    std::string description;
    std::vector<std::string> attribute_path;  // category hierarchy, never empty
    std::map<std::string, std::string> meta;
};

// Title, description and attributes joined; the document the rankers score.
std::string item_document(const Item& item);

// "title + first 40 words of description", used as the simulator's sample product.
std::string item_sample_rendering(const Item& item);

struct AttributeVocab {
    std::set<std::string> entries;
    std::map<std::string, std::string> usage_notes;

    bool contains(const std::string& attribute) const { return entries.count(attribute) != 0; }
    std::vector<std::string> sorted() const { return {entries.begin(), entries.end()}; }
};

struct UserHistory {
    std::string user_id;
    std::vector<std::string> interactions;  // chronological; last one is the target
    std::string profile_text;

    const std::string& target_item() const { return interactions.back(); }
};

// Immutable once built; shared read-only across concurrent sessions.
class Catalog {
public:
    static constexpr std::size_t kProfileWindow = 20;

    Catalog() = default;

    const std::vector<Item>& items() const { return items_; }
    const AttributeVocab& vocab() const { return vocab_; }
    const std::vector<UserHistory>& histories() const { return histories_; }

    const Item* find(const std::string& id) const;
    const Item& at(const std::string& id) const;  // throws CatalogError
    std::size_t size() const { return items_.size(); }

    std::string serialize_items() const;
    std::string serialize_vocab() const;
    std::string serialize_histories() const;

    // Writes items.jsonl, vocab.txt and histories.jsonl into dir.
    void save(const std::filesystem::path& dir) const;
    static Catalog load(const std::filesystem::path& dir);

    friend Catalog ingest_catalog(std::istream& source);
    friend void attach_histories(Catalog& catalog, std::vector<UserHistory> histories);

private:
    std::vector<Item> items_;
    std::unordered_map<std::string, std::size_t> index_;
    AttributeVocab vocab_;
    std::vector<UserHistory> histories_;
};

// One JSON object per line: {id, title, description, attributes: "A | B | C", meta?}.
// Blank lines are skipped; errors name the 1-based line number.
Catalog ingest_catalog(std::istream& source);

// One JSON object per line: {user_id, interactions: [ids...], profile_text?}.
std::vector<UserHistory> ingest_histories(std::istream& source, const Catalog& catalog);
void attach_histories(Catalog& catalog, std::vector<UserHistory> histories);

void validate_history(const UserHistory& history, const Catalog& catalog);

// Summarizes up to kProfileWindow interactions preceding the target.
std::string build_profile(const UserHistory& history, const Catalog& catalog, LlmClient& llm);

}  // namespace taira
