#pragma once

#include "taira/catalog.hpp"
#include "taira/executors.hpp"
#include "taira/llm.hpp"
#include "taira/orchestrator.hpp"
#include "taira/retrieval.hpp"
#include "taira/thought_store.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace taira::testing {

inline std::filesystem::path data_dir() { return TAIRA_TEST_DATA; }
inline std::filesystem::path pattern_dir() { return TAIRA_PATTERN_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Catalog load_fixture_catalog() {
    std::ifstream items(data_dir() / "catalog.jsonl");
    Catalog catalog = ingest_catalog(items);
    std::ifstream hist(data_dir() / "histories.jsonl");
    attach_histories(catalog, ingest_histories(hist, catalog));
    return catalog;
}

// Catalog, retriever, search corpus and bootstrap patterns, built once.
struct World {
    Catalog catalog = load_fixture_catalog();
    Retriever retriever{catalog};
    OfflineSearchClient search = OfflineSearchClient::from_file(data_dir() / "search_corpus.jsonl");
    PatternStore store = PatternStore::load(pattern_dir());
    HashingEmbedding embedder;

    World() { store.ensure_embeddings(embedder); }
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    ExecutorContext executors() const { return ExecutorContext{catalog, retriever, search}; }

    SessionDeps deps(const PatternStore* s) const {
        return SessionDeps{s, executors(), &embedder, SessionConfig{}};
    }
};

inline const World& world() {
    static const World w;
    return w;
}

// Scripted provider plus ledger and client, for one test.
struct Llm {
    std::unique_ptr<ScriptedProvider> provider;
    TokenLedger ledger;
    LlmClient client;

    explicit Llm(std::unique_ptr<ScriptedProvider> p = std::make_unique<ScriptedProvider>())
        : provider(std::move(p)), client(*provider, ledger) {}
};

inline constexpr const char* kGatheringQuery =
    "Can you suggest some blouses for a gathering with friends? I'm not sure about the specific wearing scene.";

}  // namespace taira::testing
