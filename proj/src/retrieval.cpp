#include "taira/retrieval.hpp"

#include "taira/errors.hpp"
#include "taira/kernels.hpp"
#include "taira/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace taira {

using nlohmann::json;

namespace {

void sort_and_truncate(std::vector<std::pair<std::string, double>>& entries, std::size_t k) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (entries.size() > k) entries.resize(k);
}

std::vector<std::string> query_tokens(const std::vector<std::string>& terms) {
    std::vector<std::string> out;
    for (const auto& t : terms) {
        auto toks = text::tokenize(t);
        out.insert(out.end(), toks.begin(), toks.end());
    }
    return out;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw RetrievalError("cannot write " + p.string());
    out << s;
}

}  // namespace

std::vector<std::string> RankedList::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [id, score] : entries) out.push_back(id);
    return out;
}

HashingEmbedding::HashingEmbedding(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw RetrievalError("embedding dimension must be positive");
}

std::vector<float> HashingEmbedding::embed(std::string_view s) const {
    std::vector<float> v(dimension_, 0.0f);
    auto toks = text::tokenize(s);
    auto add = [&](const std::string& feature, float weight) {
        std::uint64_t h = text::fnv1a(feature);
        float sign = (h >> 63) ? -1.0f : 1.0f;
        v[h % dimension_] += sign * weight;
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        add(toks[i], 1.0f);
        if (i + 1 < toks.size()) add(toks[i] + "_" + toks[i + 1], 0.5f);
    }
    double n = kernels::norm(v);
    if (n > 0) {
        for (auto& x : v) x = static_cast<float>(x / n);
    }
    return v;
}

Bm25Index Bm25Index::build(const Catalog& catalog, Bm25Params params) {
    Bm25Index idx;
    idx.params_ = params;
    std::uint64_t total = 0;
    for (const auto& item : catalog.items()) {
        auto toks = text::tokenize(item_document(item));
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : toks) ++tf[t];
        auto doc = static_cast<std::uint32_t>(idx.ids_.size());
        for (const auto& [term, count] : tf) idx.postings_[term].push_back({doc, count});
        idx.ids_.push_back(item.id);
        idx.lengths_.push_back(static_cast<std::uint32_t>(toks.size()));
        total += toks.size();
    }
    idx.avgdl_ = idx.ids_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(idx.ids_.size());
    return idx;
}

std::vector<double> Bm25Index::scores_for(const std::vector<std::string>& query_terms) const {
    std::vector<double> scores(ids_.size(), 0.0);
    const double n = static_cast<double>(ids_.size());
    for (const auto& term : query_tokens(query_terms)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * lengths_[p.doc] / avgdl_);
            scores[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
        }
    }
    return scores;
}

RankedList Bm25Index::rank(const std::vector<std::string>& query_terms, std::size_t k) const {
    if (k == 0) throw RetrievalError("k must be positive");
    if (query_terms.empty()) throw RetrievalError("empty query terms");
    auto scores = scores_for(query_terms);
    RankedList out;
    out.query_terms = query_terms;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) out.entries.emplace_back(ids_[i], scores[i]);
    }
    sort_and_truncate(out.entries, k);
    return out;
}

double Bm25Index::score(const std::vector<std::string>& query_terms, const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) return 0.0;
    return scores_for(query_terms)[static_cast<std::size_t>(it - ids_.begin())];
}

void Bm25Index::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::string postings;
    for (const auto& [term, list] : postings_) {
        json arr = json::array();
        for (const auto& p : list) arr.push_back(json::array({ids_[p.doc], p.tf}));
        postings += json{{"term", term}, {"postings", arr}}.dump() + "\n";
    }
    write_text(dir / "postings.jsonl", postings);
    std::string docs;
    for (std::size_t i = 0; i < ids_.size(); ++i) docs += json{{"id", ids_[i]}, {"length", lengths_[i]}}.dump() + "\n";
    write_text(dir / "docs.jsonl", docs);
    write_text(dir / "meta.json",
               json{{"k1", params_.k1}, {"b", params_.b}, {"documents", ids_.size()}, {"avgdl", avgdl_}}.dump(2));
}

Bm25Index Bm25Index::load(const std::filesystem::path& dir) {
    Bm25Index idx;
    std::ifstream meta_in(dir / "meta.json");
    std::ifstream docs_in(dir / "docs.jsonl");
    std::ifstream post_in(dir / "postings.jsonl");
    if (!meta_in || !docs_in || !post_in) throw RetrievalError("incomplete BM25 index in " + dir.string());
    try {
        auto meta = json::parse(meta_in);
        idx.params_.k1 = meta.at("k1");
        idx.params_.b = meta.at("b");
        idx.avgdl_ = meta.at("avgdl");
        std::unordered_map<std::string, std::uint32_t> doc_of;
        std::string line;
        while (std::getline(docs_in, line)) {
            if (line.empty()) continue;
            auto d = json::parse(line);
            doc_of[d.at("id")] = static_cast<std::uint32_t>(idx.ids_.size());
            idx.ids_.push_back(d.at("id"));
            idx.lengths_.push_back(d.at("length"));
        }
        while (std::getline(post_in, line)) {
            if (line.empty()) continue;
            auto p = json::parse(line);
            auto& list = idx.postings_[p.at("term").get<std::string>()];
            for (const auto& e : p.at("postings")) list.push_back({doc_of.at(e.at(0).get<std::string>()), e.at(1)});
        }
        if (meta.at("documents").get<std::size_t>() != idx.ids_.size())
            throw RetrievalError("BM25 index document count mismatch");
    } catch (const json::exception& e) {
        throw RetrievalError(std::string("corrupt BM25 index: ") + e.what());
    } catch (const std::out_of_range&) {
        throw RetrievalError("BM25 postings reference unknown document");
    }
    return idx;
}

EmbeddingIndex EmbeddingIndex::build(const Catalog& catalog, const EmbeddingProvider& provider) {
    EmbeddingIndex idx;
    idx.dimension_ = provider.dimension();
    idx.provider_name_ = provider.name();
    idx.data_.reserve(catalog.size() * idx.dimension_);
    for (const auto& item : catalog.items()) {
        auto v = provider.embed(item_document(item));
        if (v.size() != idx.dimension_) throw RetrievalError("provider returned a vector of the wrong dimension");
        idx.ids_.push_back(item.id);
        idx.data_.insert(idx.data_.end(), v.begin(), v.end());
    }
    return idx;
}

EmbeddingIndex EmbeddingIndex::from_rows(std::vector<std::string> ids, std::size_t dimension, std::vector<float> data,
                                         std::string provider_name) {
    if (dimension == 0 || data.size() != ids.size() * dimension)
        throw RetrievalError("embedding matrix shape does not match ids");
    EmbeddingIndex idx;
    idx.ids_ = std::move(ids);
    idx.dimension_ = dimension;
    idx.data_ = std::move(data);
    idx.provider_name_ = std::move(provider_name);
    return idx;
}

std::span<const float> EmbeddingIndex::row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dimension_, dimension_);
}

RankedList EmbeddingIndex::rank_vector(std::span<const float> query, std::size_t k) const {
    if (k == 0) throw RetrievalError("k must be positive");
    if (query.size() != dimension_)
        throw RetrievalError("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                             std::to_string(dimension_));
    RankedList out;
    out.entries.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) out.entries.emplace_back(ids_[i], kernels::cosine(query, row(i)));
    sort_and_truncate(out.entries, k);
    return out;
}

RankedList EmbeddingIndex::rank(std::string_view query_text, std::size_t k, const EmbeddingProvider& provider) const {
    if (provider.dimension() != dimension_)
        throw RetrievalError("provider dimension " + std::to_string(provider.dimension()) +
                             " does not match index dimension " + std::to_string(dimension_));
    auto out = rank_vector(provider.embed(query_text), k);
    out.query_terms = {std::string(query_text)};
    return out;
}

void EmbeddingIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "embeddings.f32", std::ios::binary | std::ios::trunc);
    if (!out) throw RetrievalError("cannot write embedding matrix");
    for (float f : data_) {
        auto bits = std::bit_cast<std::uint32_t>(f);
        unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                  static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
    write_text(dir / "embeddings.json",
               json{{"dimension", dimension_}, {"provider", provider_name_}, {"ids", ids_}}.dump(2));
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& dir) {
    std::ifstream manifest_in(dir / "embeddings.json");
    std::ifstream data_in(dir / "embeddings.f32", std::ios::binary);
    if (!manifest_in || !data_in) throw RetrievalError("incomplete embedding index in " + dir.string());
    json manifest;
    try {
        manifest = json::parse(manifest_in);
    } catch (const json::exception& e) {
        throw RetrievalError(std::string("corrupt embedding manifest: ") + e.what());
    }
    std::vector<std::string> ids = manifest.at("ids");
    std::size_t dim = manifest.at("dimension");
    std::vector<float> data;
    unsigned char bytes[4];
    while (data_in.read(reinterpret_cast<char*>(bytes), 4)) {
        std::uint32_t bits = bytes[0] | (bytes[1] << 8) | (bytes[2] << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
        data.push_back(std::bit_cast<float>(bits));
    }
    return from_rows(std::move(ids), dim, std::move(data), manifest.value("provider", "custom"));
}

std::vector<std::string> map_attributes(std::string_view free_text, const AttributeVocab& vocab, std::size_t m,
                                        const EmbeddingProvider* provider) {
    if (vocab.entries.empty()) throw RetrievalError("empty attribute vocabulary");
    const auto query = text::token_set(free_text);
    std::optional<std::vector<float>> query_vec;
    if (provider) query_vec = provider->embed(free_text);

    struct Scored {
        const std::string* attr;
        std::size_t overlap;
        double coverage;
        double cosine;
    };
    std::vector<Scored> scored;
    scored.reserve(vocab.entries.size());
    for (const auto& attr : vocab.entries) {
        auto toks = text::token_set(attr);
        std::size_t overlap = 0;
        for (const auto& t : toks) overlap += query.count(t);
        double coverage = toks.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(toks.size());
        double cos = 0.0;
        if (query_vec && overlap == 0) cos = kernels::cosine(*query_vec, provider->embed(attr));
        scored.push_back({&attr, overlap, coverage, cos});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.coverage != b.coverage) return a.coverage > b.coverage;
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return *a.attr < *b.attr;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(m, scored.size()); ++i) out.push_back(*scored[i].attr);
    return out;
}

Retriever::Retriever(const Catalog& catalog)
    : catalog_(catalog), backend_(RetrievalBackend::Bm25), bm25_(Bm25Index::build(catalog)) {}

Retriever::Retriever(const Catalog& catalog, std::shared_ptr<const EmbeddingProvider> provider)
    : catalog_(catalog),
      backend_(RetrievalBackend::Embedding),
      bm25_(Bm25Index::build(catalog)),
      provider_(std::move(provider)) {
    if (!provider_) throw RetrievalError("embedding backend needs a provider");
    embeddings_ = EmbeddingIndex::build(catalog, *provider_);
}

RankedList Retriever::rank(const std::vector<std::string>& query_terms, std::size_t k) const {
    if (backend_ == RetrievalBackend::Bm25) return bm25_.rank(query_terms, k);
    if (query_terms.empty()) throw RetrievalError("empty query terms");
    auto out = embeddings_->rank(text::join(query_terms, " "), k, *provider_);
    // Non-positive similarity carries no evidence of relevance.
    std::erase_if(out.entries, [](const auto& e) { return e.second <= 0.0; });
    out.query_terms = query_terms;
    return out;
}

}  // namespace taira
