#pragma once

#include "taira/catalog.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taira {

// Scores non-increasing, ties ordered by ascending id, no duplicate ids.
struct RankedList {
    std::vector<std::pair<std::string, double>> entries;
    std::vector<std::string> query_terms;

    std::vector<std::string> ids() const;
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<float> embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
};

// Signed feature hashing of stemmed unigrams and bigrams, L2-normalized.
// Deterministic and dependency-free; stands in for a neural encoder.
class HashingEmbedding : public EmbeddingProvider {
public:
    explicit HashingEmbedding(std::size_t dimension = 256);

    std::vector<float> embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "hashing-" + std::to_string(dimension_); }

private:
    std::size_t dimension_;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Inverted index over item_document(). idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
class Bm25Index {
public:
    static Bm25Index build(const Catalog& catalog, Bm25Params params = {});

    // Top-k positive-scoring items. Throws RetrievalError on k == 0 or empty terms.
    RankedList rank(const std::vector<std::string>& query_terms, std::size_t k) const;

    // Score of one document for the given terms; 0 for unknown ids.
    double score(const std::vector<std::string>& query_terms, const std::string& id) const;

    const Bm25Params& params() const { return params_; }
    std::size_t document_count() const { return ids_.size(); }
    double average_length() const { return avgdl_; }

    // index/postings.jsonl (term -> [[id, tf], ...]), index/docs.jsonl, index/meta.json
    void save(const std::filesystem::path& dir) const;
    static Bm25Index load(const std::filesystem::path& dir);

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };

    std::vector<double> scores_for(const std::vector<std::string>& query_terms) const;

    Bm25Params params_;
    std::vector<std::string> ids_;
    std::vector<std::uint32_t> lengths_;
    double avgdl_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_;
};

// Row-major float32 matrix of item embeddings.
class EmbeddingIndex {
public:
    static EmbeddingIndex build(const Catalog& catalog, const EmbeddingProvider& provider);

    // Cosine top-k. Throws RetrievalError on dimension mismatch or k == 0.
    RankedList rank(std::string_view query_text, std::size_t k, const EmbeddingProvider& provider) const;
    RankedList rank_vector(std::span<const float> query, std::size_t k) const;

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    std::span<const float> row(std::size_t i) const;

    // index/embeddings.f32 (little-endian) + index/embeddings.json manifest
    void save(const std::filesystem::path& dir) const;
    static EmbeddingIndex load(const std::filesystem::path& dir);

    static EmbeddingIndex from_rows(std::vector<std::string> ids, std::size_t dimension, std::vector<float> data,
                                    std::string provider_name = "custom");

private:
    std::vector<std::string> ids_;
    std::size_t dimension_ = 0;
    std::vector<float> data_;
    std::string provider_name_;
};

// Nearest vocabulary members by shared-token count, then covered fraction of
// the attribute's tokens; zero-overlap entries fall back to cosine (when a
// provider is given) and finally lexicographic order. Output is always a
// subset of the vocabulary with min(m, |vocab|) entries.
std::vector<std::string> map_attributes(std::string_view free_text, const AttributeVocab& vocab, std::size_t m,
                                        const EmbeddingProvider* provider = nullptr);

enum class RetrievalBackend { Bm25, Embedding };

// What the Item Retriever talks to: a catalog plus one active ranking backend.
class Retriever {
public:
    static constexpr std::size_t kDefaultCandidatePool = 50;

    explicit Retriever(const Catalog& catalog);
    Retriever(const Catalog& catalog, std::shared_ptr<const EmbeddingProvider> provider);

    RankedList rank(const std::vector<std::string>& query_terms, std::size_t k) const;

    const Catalog& catalog() const { return catalog_; }
    RetrievalBackend backend() const { return backend_; }
    const Bm25Index& bm25() const { return bm25_; }
    const EmbeddingProvider* embedding_provider() const { return provider_.get(); }

private:
    const Catalog& catalog_;
    RetrievalBackend backend_;
    Bm25Index bm25_;
    std::shared_ptr<const EmbeddingProvider> provider_;
    std::optional<EmbeddingIndex> embeddings_;
};

}  // namespace taira
