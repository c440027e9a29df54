#include "taira/cli.hpp"
#include "taira/config.hpp"
#include "taira/errors.hpp"
#include "taira/thought_store.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace taira;
using namespace taira::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

// A scratch workspace with an ingested catalog and a copy of the bootstrap patterns.
struct Workspace {
    fs::path root;
    fs::path config;

    Workspace() {
        root = fs::temp_directory_path() / "taira_cli_test";
        fs::remove_all(root);
        fs::create_directories(root / "patterns");
        fs::copy(pattern_dir() / "patterns.json", root / "patterns" / "patterns.json");
        config = root / "taira.conf";
        std::ofstream(config) << "catalog_dir = catalog\n"
                              << "pattern_dir = patterns\n"
                              << "search_corpus = " << (data_dir() / "search_corpus.jsonl").string() << "\n"
                              << "fixture = " << (data_dir() / "gathering_fixture.json").string() << "\n"
                              << "run_dir = runs\n"
                              << "parallelism = 2\n";
        auto r = cli({"--config", config.string(), "ingest", "--catalog", (data_dir() / "catalog.jsonl").string(),
                      "--histories", (data_dir() / "histories.jsonl").string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    ~Workspace() { fs::remove_all(root); }

    std::string patterns() const { return slurp(root / "patterns" / "patterns.json"); }
};

}  // namespace

TEST_CASE("config parsing") {
    auto env = [](const std::string& name) -> std::optional<std::string> {
        if (name == "HOME_DIR") return "/data";
        return std::nullopt;
    };
    auto c = Config::parse("# comment\ncatalog_dir = ${HOME_DIR}/cat\n\ntop_k = 7\nretrieval=embedding\n", env);
    CHECK(c.catalog_dir == "/data/cat");
    CHECK(c.top_k == 7);
    CHECK(c.retrieval == "embedding");
    CHECK(Config::parse(c.serialize(), env) == c);

    CHECK_THROWS_WITH_AS(Config::parse("x = ${NOPE}\n", env), doctest::Contains("NOPE"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse("top_k = 1\nbogus = 2\n", env), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse("top_k = five\n", env), doctest::Contains("top_k"), ConfigError);
    CHECK_THROWS_AS(Config::parse("top_k = 0\n", env), ConfigError);
    CHECK_THROWS_AS(Config::parse("provider = http\n", env), ConfigError);
    CHECK_THROWS_AS(Config::parse("just text\n", env), ConfigError);
}

TEST_CASE("config file paths resolve against the file") {
    auto dir = fs::temp_directory_path() / "taira_conf_test";
    fs::create_directories(dir);
    std::ofstream(dir / "c.conf") << "catalog_dir = cat\npattern_dir = /abs/p\n";
    auto c = Config::load(dir / "c.conf");
    CHECK(c.catalog_dir == (dir / "cat").string());
    CHECK(c.pattern_dir == "/abs/p");
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 2, domain errors exit 1") {
    CHECK(cli({"evaluate", "--out", "x"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"distill"}).code == 2);
    CHECK(cli({"--help"}).code == 0);

    CHECK(cli({"--set", "top_k=0", "patterns", "list"}).code == 1);
    CHECK(cli({"--set", "top_k", "patterns", "list"}).code == 1);

    auto missing = cli({"--config", "/nonexistent/taira.conf", "patterns", "list"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("/nonexistent/taira.conf") != std::string::npos);
}

TEST_CASE("ask, evaluate and report through the command line") {
    Workspace ws;
    const auto conf = ws.config.string();
    const auto before = ws.patterns();

    auto ask = cli({"--config", conf, "ask", "--query", kGatheringQuery, "--run-dir", (ws.root / "ask").string()});
    REQUIRE_MESSAGE(ask.code == 0, ask.err);
    auto response = nlohmann::json::parse(ask.out);
    CHECK(response["lists"].size() == 2);
    CHECK(fs::exists(ws.root / "ask" / "trajectory.json"));
    CHECK(fs::exists(ws.root / "ask" / "ledger.json"));

    auto gen = cli({"--config", conf, "genqueries", "--difficulty", "all", "--count", "2", "--seed", "3", "--out",
                    (ws.root / "suite.jsonl").string()});
    REQUIRE_MESSAGE(gen.code == 0, gen.err);
    auto ev = cli({"--config", conf, "evaluate", "--suite", (ws.root / "suite.jsonl").string(), "--out",
                   (ws.root / "run_a").string()});
    REQUIRE_MESSAGE(ev.code == 0, ev.err);
    CHECK(ev.out.rfind("difficulty,count,HR@10,NDCG@10,SR\n", 0) == 0);
    auto ev2 = cli({"--config", conf, "evaluate", "--suite", (ws.root / "suite.jsonl").string(), "--strategy",
                    "zero-shot", "--out", (ws.root / "run_b").string()});
    REQUIRE(ev2.code == 0);
    auto rep = cli({"report", "--run", (ws.root / "run_a").string(), "--baseline", (ws.root / "run_b").string()});
    REQUIRE_MESSAGE(rep.code == 0, rep.err);
    CHECK(rep.out.find("metric,pairs,t,p") != std::string::npos);

    auto overridden = cli({"--config", conf, "--set", "pattern_dir=" + (ws.root / "nowhere").string(), "patterns", "list"});
    CHECK(overridden.code == 1);
    CHECK(overridden.err.find("nowhere") != std::string::npos);

    auto list = cli({"--config", conf, "patterns", "list"});
    CHECK(list.code == 0);
    CHECK(list.out.find("tp-4\t") != std::string::npos);
    CHECK(cli({"--config", conf, "patterns", "show", "tp-99"}).code == 1);

    // None of the above may touch the pattern store.
    CHECK(ws.patterns() == before);
}

TEST_CASE("only distill and remove-scenario mutate the store") {
    Workspace ws;
    const auto conf = ws.config.string();

    auto rm = cli({"--config", conf, "patterns", "remove-scenario", "ambiguous"});
    REQUIRE(rm.code == 0);
    CHECK(rm.out.find("removed 1") != std::string::npos);
    CHECK(PatternStore::load(ws.root / "patterns").size() == 6);

    auto dist = cli({"--config", conf, "distill", "--opinion", (data_dir() / "expert_experience.txt").string(),
                     "--scenario", "occasions"});
    REQUIRE_MESSAGE(dist.code == 0, dist.err);
    CHECK(dist.out.find("expert_direct") != std::string::npos);
    CHECK(PatternStore::load(ws.root / "patterns").size() == 7);
}
