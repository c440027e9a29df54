#include "taira/catalog.hpp"
#include "taira/errors.hpp"
#include "taira/llm.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <sstream>

using namespace taira;
using namespace taira::testing;

namespace {

Catalog catalog_from(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return ingest_catalog(in);
}

std::string error_of(const std::string& jsonl) {
    try {
        catalog_from(jsonl);
    } catch (const CatalogError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("fixture catalog ingests completely") {
    const auto& w = world();
    CHECK(w.catalog.size() == 168);
    CHECK(w.catalog.histories().size() == 60);
    CHECK(w.catalog.vocab().contains("Semi-Formal"));
    CHECK(w.catalog.vocab().contains("Blouses"));
    const Item& it = w.catalog.at("C0001");
    CHECK(it.attribute_path.front() == "Clothing");
    CHECK(it.meta.at("type") == "women's blouse");
}

TEST_CASE("attribute paths are split on the pipe separator") {
    auto cat = catalog_from(R"({"id":"a","title":"T","description":"d","attributes":"X |  Y| Z"})" "\n");
    CHECK(cat.at("a").attribute_path == std::vector<std::string>{"X", "Y", "Z"});
    CHECK(cat.vocab().sorted() == std::vector<std::string>{"X", "Y", "Z"});
}

TEST_CASE("ingest errors name the offending line") {
    CHECK(error_of("\n{\"id\":\"a\",\"title\":\"t\",\"description\":\"d\"}\n").find("line 2") != std::string::npos);
    CHECK(error_of("{not json}\n").find("line 1") != std::string::npos);
    const std::string dup = R"({"id":"a","title":"t","description":"d","attributes":"X"})" "\n"
                            R"({"id":"a","title":"u","description":"e","attributes":"Y"})" "\n";
    CHECK(error_of(dup).find("duplicate id 'a'") != std::string::npos);
    CHECK(error_of("\n\n").find("empty catalog") != std::string::npos);
    CHECK_THROWS_AS(world().catalog.at("nope"), CatalogError);
}

TEST_CASE("histories must reference known items") {
    const auto& cat = world().catalog;
    std::istringstream bad(R"({"user_id":"u","interactions":["C0001","ZZZ"]})" "\n");
    CHECK_THROWS_WITH_AS(ingest_histories(bad, cat), doctest::Contains("unknown id 'ZZZ'"), CatalogError);
    UserHistory h{"u", {"C0001", "C0002"}, ""};
    CHECK_NOTHROW(validate_history(h, cat));
    CHECK(h.target_item() == "C0002");
}

TEST_CASE("store round trip preserves every serialized view") {
    const auto& cat = world().catalog;
    auto dir = std::filesystem::temp_directory_path() / "taira_catalog_rt";
    std::filesystem::remove_all(dir);
    cat.save(dir);
    Catalog back = Catalog::load(dir);
    CHECK(back.serialize_items() == cat.serialize_items());
    CHECK(back.serialize_vocab() == cat.serialize_vocab());
    CHECK(back.serialize_histories() == cat.serialize_histories());
    std::filesystem::remove_all(dir);
}

TEST_CASE("sample rendering keeps the title and at most 40 description words") {
    Item it{"x", "Title Here", "", {"A"}, {}};
    for (int i = 0; i < 60; ++i) it.description += "w" + std::to_string(i) + " ";
    auto r = item_sample_rendering(it);
    CHECK(r.find("Title Here") == 0);
    CHECK(r.find("w39") != std::string::npos);
    CHECK(r.find("w40") == std::string::npos);
}

TEST_CASE("profile summarizes the interactions before the target") {
    Llm llm;
    const auto& cat = world().catalog;
    const auto& h = cat.histories().front();
    auto profile = build_profile(h, cat, llm.client);
    CHECK_FALSE(profile.empty());
    CHECK(llm.ledger.tag(CallTag::QueryGen).calls == 1);
}
