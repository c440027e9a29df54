#include "taira/errors.hpp"
#include "taira/kernels.hpp"
#include "taira/retrieval.hpp"
#include "taira/text.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace taira;
using namespace taira::testing;

namespace {

Catalog tiny() {
    std::istringstream in(
        R"({"id":"a","title":"Red silk blouse","description":"silk silk","attributes":"Tops | Blouses"})" "\n"
        R"({"id":"b","title":"Blue denim jeans","description":"sturdy denim for every day","attributes":"Bottoms | Jeans"})" "\n"
        R"({"id":"c","title":"Green silk scarf","description":"light","attributes":"Accessories"})" "\n");
    return ingest_catalog(in);
}

// Okapi BM25 computed from scratch.
double oracle_bm25(const Catalog& cat, const std::vector<std::string>& query, const std::string& id) {
    const double k1 = 1.2, b = 0.75;
    std::map<std::string, std::vector<std::string>> docs;
    double total = 0;
    for (const auto& it : cat.items()) {
        docs[it.id] = text::tokenize(item_document(it));
        total += docs[it.id].size();
    }
    const double n = docs.size(), avgdl = total / n;
    std::set<std::string> terms;
    for (const auto& q : query)
        for (const auto& t : text::tokenize(q)) terms.insert(t);
    double score = 0;
    for (const auto& t : terms) {
        double df = 0;
        for (const auto& [_, toks] : docs) df += std::count(toks.begin(), toks.end(), t) > 0;
        const auto& d = docs.at(id);
        const double tf = std::count(d.begin(), d.end(), t);
        if (tf == 0) continue;
        const double idf = std::log(1 + (n - df + 0.5) / (df + 0.5));
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * d.size() / avgdl));
    }
    return score;
}

}  // namespace

TEST_CASE("bm25 scores match the textbook formula") {
    auto cat = tiny();
    auto idx = Bm25Index::build(cat);
    for (const auto& q : std::vector<std::vector<std::string>>{{"silk"}, {"denim jeans"}, {"silk", "blouse"}, {"light scarf"}}) {
        for (const auto& id : {"a", "b", "c"}) {
            CAPTURE(id);
            CHECK(idx.score(q, id) == doctest::Approx(oracle_bm25(cat, q, id)).epsilon(1e-12));
        }
    }
    CHECK(idx.score({"silk"}, "zzz") == 0.0);
}

TEST_CASE("bm25 ranking is ordered, positive and deterministic") {
    auto cat = tiny();
    auto idx = Bm25Index::build(cat);
    auto r = idx.rank({"silk"}, 10);
    REQUIRE(r.size() == 2);
    CHECK(r.entries[0].first == "a");
    CHECK(r.entries[0].second >= r.entries[1].second);
    CHECK(idx.rank({"nothing matches"}, 5).empty());
    CHECK_THROWS_AS(idx.rank({"silk"}, 0), RetrievalError);
    CHECK_THROWS_AS(idx.rank({}, 3), RetrievalError);
}

TEST_CASE("ties break by ascending id") {
    std::istringstream in(R"({"id":"z","title":"same words","description":"","attributes":"A"})" "\n"
                          R"({"id":"m","title":"same words","description":"","attributes":"A"})" "\n");
    auto cat = ingest_catalog(in);
    auto r = Bm25Index::build(cat).rank({"same"}, 5);
    CHECK(r.ids() == std::vector<std::string>{"m", "z"});
}

TEST_CASE("bm25 index survives save and load") {
    const auto& cat = world().catalog;
    auto idx = Bm25Index::build(cat);
    auto dir = std::filesystem::temp_directory_path() / "taira_bm25_rt";
    std::filesystem::remove_all(dir);
    idx.save(dir);
    auto back = Bm25Index::load(dir);
    auto a = idx.rank({"semi-formal blouse"}, 20);
    auto b = back.rank({"semi-formal blouse"}, 20);
    CHECK(a.entries == b.entries);
    std::filesystem::remove_all(dir);
}

TEST_CASE("embedding index agrees with brute-force cosine") {
    const auto& cat = world().catalog;
    HashingEmbedding emb(64);
    auto idx = EmbeddingIndex::build(cat, emb);
    auto q = emb.embed("casual cotton dress for the beach");
    auto got = idx.rank_vector(q, 5);
    std::vector<std::pair<double, std::string>> brute;
    for (const auto& it : cat.items()) brute.emplace_back(-kernels::cosine(q, emb.embed(item_document(it))), it.id);
    std::sort(brute.begin(), brute.end());
    REQUIRE(got.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(got.entries[i].first == brute[i].second);
        CHECK(got.entries[i].second == doctest::Approx(-brute[i].first).epsilon(1e-5));
    }
    std::vector<float> wrong(3, 1.0f);
    CHECK_THROWS_AS(idx.rank_vector(wrong, 5), RetrievalError);
}

TEST_CASE("embedding index round trips through disk") {
    HashingEmbedding emb(32);
    auto idx = EmbeddingIndex::build(world().catalog, emb);
    auto dir = std::filesystem::temp_directory_path() / "taira_emb_rt";
    std::filesystem::remove_all(dir);
    idx.save(dir);
    auto back = EmbeddingIndex::load(dir);
    REQUIRE(back.size() == idx.size());
    for (std::size_t i = 0; i < idx.size(); i += 17) {
        auto a = idx.row(i), b = back.row(i);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("hashing embedding is normalized and deterministic") {
    HashingEmbedding emb(128);
    auto v = emb.embed("light linen shirt");
    CHECK(v.size() == 128);
    CHECK(kernels::norm(v) == doctest::Approx(1.0));
    CHECK(v == emb.embed("light linen shirt"));
}

TEST_CASE("attribute mapping stays inside the vocabulary") {
    const auto& vocab = world().catalog.vocab();
    CHECK(map_attributes("semi formal gatherings with friends", vocab, 3).front() == "Semi-Formal");
    std::mt19937 rng(3);
    const std::vector<std::string> words{"beach", "office", "warm", "silk", "party", "hiking", "xyz", "formal", "q"};
    HashingEmbedding emb;
    for (int round = 0; round < 50; ++round) {
        std::string s;
        for (int i = 0; i < 4; ++i) s += words[rng() % words.size()] + " ";
        for (const EmbeddingProvider* p : {static_cast<const EmbeddingProvider*>(nullptr), static_cast<const EmbeddingProvider*>(&emb)}) {
            auto out = map_attributes(s, vocab, 5, p);
            CHECK(out.size() == 5);
            for (const auto& a : out) CHECK(vocab.contains(a));
            CHECK(std::set<std::string>(out.begin(), out.end()).size() == out.size());
        }
    }
    AttributeVocab two;
    two.entries = {"A", "B"};
    CHECK(map_attributes("anything", two, 5).size() == 2);
}

TEST_CASE("retriever backends") {
    const auto& cat = world().catalog;
    Retriever bm25(cat);
    CHECK(bm25.backend() == RetrievalBackend::Bm25);
    CHECK_FALSE(bm25.rank({"blouse"}, 10).empty());
    Retriever dense(cat, std::make_shared<HashingEmbedding>());
    CHECK(dense.backend() == RetrievalBackend::Embedding);
    auto r = dense.rank({"blouse", "satin"}, 10);
    CHECK(r.size() == 10);
}
