#include "taira/catalog.hpp"

#include "taira/errors.hpp"
#include "taira/llm.hpp"
#include "taira/prompts.hpp"
#include "taira/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>
#include <sstream>

namespace taira {

using nlohmann::json;

namespace {

constexpr std::string_view kAttributeSeparator = " | ";

std::string require_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw CatalogError("line " + std::to_string(line) + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

Item parse_item(const std::string& raw, std::size_t line) {
    json obj;
    try {
        obj = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw CatalogError("line " + std::to_string(line) + ": malformed record: " + e.what());
    }
    if (!obj.is_object()) throw CatalogError("line " + std::to_string(line) + ": record is not an object");

    Item item;
    item.id = require_string(obj, "id", line);
    item.title = require_string(obj, "title", line);
    if (auto it = obj.find("description"); it != obj.end() && it->is_string()) item.description = *it;
    for (auto& part : text::split(require_string(obj, "attributes", line), "|")) {
        auto attr = text::trim(part);
        if (!attr.empty()) item.attribute_path.push_back(std::move(attr));
    }
    if (item.id.empty()) throw CatalogError("line " + std::to_string(line) + ": empty id");
    if (item.attribute_path.empty())
        throw CatalogError("line " + std::to_string(line) + ": empty attribute path for '" + item.id + "'");
    if (auto it = obj.find("meta"); it != obj.end() && it->is_object()) {
        for (auto& [k, v] : it->items()) item.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return item;
}

json item_to_json(const Item& item) {
    json obj = json::object();
    obj["id"] = item.id;
    obj["title"] = item.title;
    obj["description"] = item.description;
    obj["attributes"] = text::join(item.attribute_path, kAttributeSeparator);
    if (!item.meta.empty()) obj["meta"] = item.meta;
    return obj;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CatalogError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw CatalogError("cannot write " + p.string());
    out << content;
}

}  // namespace

std::string item_document(const Item& item) {
    return item.title + " " + item.description + " " + text::join(item.attribute_path, " ");
}

std::string item_sample_rendering(const Item& item) {
    auto desc = text::first_words(item.description, 40);
    return desc.empty() ? item.title : item.title + ". " + desc;
}

const Item* Catalog::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &items_[it->second];
}

const Item& Catalog::at(const std::string& id) const {
    if (const Item* item = find(id)) return *item;
    throw CatalogError("unknown item id '" + id + "'");
}

Catalog ingest_catalog(std::istream& source) {
    Catalog cat;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(source, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        Item item = parse_item(raw, line);
        if (cat.index_.count(item.id))
            throw CatalogError("line " + std::to_string(line) + ": duplicate id '" + item.id + "'");
        for (const auto& attr : item.attribute_path) cat.vocab_.entries.insert(attr);
        cat.index_.emplace(item.id, cat.items_.size());
        cat.items_.push_back(std::move(item));
    }
    if (cat.items_.empty()) throw CatalogError("empty catalog");
    return cat;
}

void validate_history(const UserHistory& history, const Catalog& catalog) {
    if (history.interactions.size() < 2)
        throw CatalogError("history too short for user '" + history.user_id + "'");
    for (const auto& id : history.interactions) {
        if (!catalog.find(id))
            throw CatalogError("history of user '" + history.user_id + "' references unknown id '" + id + "'");
    }
}

std::vector<UserHistory> ingest_histories(std::istream& source, const Catalog& catalog) {
    std::vector<UserHistory> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(source, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        json obj;
        try {
            obj = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw CatalogError("histories line " + std::to_string(line) + ": malformed record: " + e.what());
        }
        UserHistory h;
        h.user_id = require_string(obj, "user_id", line);
        auto it = obj.find("interactions");
        if (it == obj.end() || !it->is_array())
            throw CatalogError("histories line " + std::to_string(line) + ": missing interactions array");
        for (const auto& id : *it) h.interactions.push_back(id.get<std::string>());
        if (auto p = obj.find("profile_text"); p != obj.end() && p->is_string()) h.profile_text = *p;
        validate_history(h, catalog);
        out.push_back(std::move(h));
    }
    return out;
}

void attach_histories(Catalog& catalog, std::vector<UserHistory> histories) {
    for (const auto& h : histories) validate_history(h, catalog);
    catalog.histories_ = std::move(histories);
}

std::string Catalog::serialize_items() const {
    std::string out;
    for (const auto& item : items_) out += item_to_json(item).dump() + "\n";
    return out;
}

std::string Catalog::serialize_vocab() const {
    std::string out;
    for (const auto& attr : vocab_.entries) out += attr + "\n";
    return out;
}

std::string Catalog::serialize_histories() const {
    std::string out;
    for (const auto& h : histories_) {
        json obj = {{"user_id", h.user_id}, {"interactions", h.interactions}};
        if (!h.profile_text.empty()) obj["profile_text"] = h.profile_text;
        out += obj.dump() + "\n";
    }
    return out;
}

void Catalog::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_file(dir / "items.jsonl", serialize_items());
    write_file(dir / "vocab.txt", serialize_vocab());
    write_file(dir / "histories.jsonl", serialize_histories());
    if (!vocab_.usage_notes.empty()) write_file(dir / "vocab_notes.json", json(vocab_.usage_notes).dump(2));
}

Catalog Catalog::load(const std::filesystem::path& dir) {
    std::istringstream items(read_file(dir / "items.jsonl"));
    Catalog cat = ingest_catalog(items);
    if (std::filesystem::exists(dir / "histories.jsonl")) {
        std::istringstream hist(read_file(dir / "histories.jsonl"));
        attach_histories(cat, ingest_histories(hist, cat));
    }
    if (std::filesystem::exists(dir / "vocab_notes.json")) {
        auto notes = json::parse(read_file(dir / "vocab_notes.json"));
        for (auto& [k, v] : notes.items()) {
            if (cat.vocab_.contains(k)) cat.vocab_.usage_notes[k] = v.get<std::string>();
        }
    }
    return cat;
}

std::string build_profile(const UserHistory& history, const Catalog& catalog, LlmClient& llm) {
    validate_history(history, catalog);
    const auto& ids = history.interactions;
    const std::size_t end = ids.size() - 1;  // exclude the target
    const std::size_t begin = end > Catalog::kProfileWindow ? end - Catalog::kProfileWindow : 0;

    std::vector<prompts::HistoryItem> rendered;
    for (std::size_t i = begin; i < end; ++i) {
        const Item& item = catalog.at(ids[i]);
        rendered.push_back({item.id, item.title, item.attribute_path});
    }
    auto req = ChatRequest::make(CallTag::QueryGen, prompts::profile_system(), prompts::profile_user(rendered));
    auto profile = text::trim(llm.complete(req));
    if (profile.empty()) throw CatalogError("empty profile for user '" + history.user_id + "'");
    return profile;
}

}  // namespace taira
