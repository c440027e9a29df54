#include "taira/cli.hpp"

#include "taira/catalog.hpp"
#include "taira/config.hpp"
#include "taira/errors.hpp"
#include "taira/evalharness.hpp"
#include "taira/llm.hpp"
#include "taira/orchestrator.hpp"
#include "taira/retrieval.hpp"
#include "taira/text.hpp"
#include "taira/thought_store.hpp"
#include "taira/usersim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace taira {

using nlohmann::json;

namespace {

class EmptySearch : public SearchClient {
public:
    std::vector<SearchResult> search(std::string_view) const override { return {}; }
};

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

// Everything a command needs, built lazily from the config. Not movable:
// the retriever keeps a reference to the catalog.
class Runtime {
public:
    explicit Runtime(Config config) : config_(std::move(config)) {}
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    const Config& config() const { return config_; }

    const Catalog& catalog() {
        if (!catalog_) {
            if (!std::filesystem::is_directory(config_.catalog_dir))
                throw ConfigError("catalog store not found: " + config_.catalog_dir);
            catalog_ = Catalog::load(config_.catalog_dir);
        }
        return *catalog_;
    }

    const Retriever& retriever() {
        if (!retriever_) {
            if (config_.retrieval == "embedding") {
                retriever_ = std::make_unique<Retriever>(catalog(), std::make_shared<HashingEmbedding>());
            } else {
                retriever_ = std::make_unique<Retriever>(catalog());
            }
        }
        return *retriever_;
    }

    const SearchClient& search() {
        if (!search_) {
            if (config_.search_corpus.empty()) {
                search_ = std::make_unique<EmptySearch>();
            } else {
                search_ = std::make_unique<OfflineSearchClient>(OfflineSearchClient::from_file(config_.search_corpus));
            }
        }
        return *search_;
    }

    ChatProvider& provider() {
        if (!provider_) {
            if (config_.provider == "http") {
                HttpProviderConfig h;
                h.base_url = config_.base_url;
                h.model = config_.model;
                auto key = process_env(config_.api_key_env);
                if (!key) throw ConfigError("environment variable " + config_.api_key_env + " is not set");
                h.api_key = *key;
                provider_ = std::make_unique<HttpProvider>(h);
            } else if (!config_.fixture.empty()) {
                provider_ = ScriptedProvider::from_file(config_.fixture);
            } else {
                provider_ = std::make_unique<ScriptedProvider>();
            }
        }
        return *provider_;
    }

    PatternStore& store() {
        if (!store_) {
            if (!std::filesystem::is_directory(config_.pattern_dir))
                throw ConfigError("pattern store not found: " + config_.pattern_dir);
            store_ = PatternStore::load(config_.pattern_dir);
        }
        return *store_;
    }

    const EmbeddingProvider& embedder() const { return embedder_; }

    ExecutorContext executors() {
        ExecutorContext ctx{catalog(), retriever(), search()};
        ctx.domain_noun = config_.domain_noun;
        ctx.candidate_pool = static_cast<std::size_t>(config_.candidate_pool);
        return ctx;
    }

    SessionConfig session_config() const {
        SessionConfig s;
        s.top_k = static_cast<std::size_t>(config_.top_k);
        s.max_phases = static_cast<int>(config_.max_phases);
        s.retry_limit = static_cast<int>(config_.retry_limit);
        return s;
    }

private:
    Config config_;
    std::optional<Catalog> catalog_;
    std::unique_ptr<Retriever> retriever_;
    std::unique_ptr<SearchClient> search_;
    std::unique_ptr<ChatProvider> provider_;
    std::optional<PatternStore> store_;
    HashingEmbedding embedder_;
};

Config load_config(const std::string& flag_path, const std::vector<std::string>& overrides) {
    std::string path = flag_path;
    if (path.empty()) {
        if (auto env = process_env("TAIRA_CONFIG")) path = *env;
    }
    Config c = path.empty() ? Config{} : Config::load(path);
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        c.set(text::trim(kv.substr(0, eq)), text::trim(kv.substr(eq + 1)));
    }
    c.validate();
    return c;
}

std::set<std::string> split_tags(const std::string& s) {
    std::set<std::string> out;
    for (auto& t : text::split(s, ",")) {
        if (auto v = text::trim(t); !v.empty()) out.insert(v);
    }
    return out;
}

std::string hex_id(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(text::fnv1a(s)));
    return buf;
}

int cmd_ingest(Runtime& rt, const std::string& catalog_path, const std::string& histories_path, std::string out_dir,
               std::ostream& out) {
    if (out_dir.empty()) out_dir = rt.config().catalog_dir;
    std::ifstream in(catalog_path);
    if (!in) throw CatalogError("cannot read catalog " + catalog_path);
    Catalog cat = ingest_catalog(in);
    if (!histories_path.empty()) {
        std::ifstream h(histories_path);
        if (!h) throw CatalogError("cannot read histories " + histories_path);
        attach_histories(cat, ingest_histories(h, cat));
    }
    cat.save(out_dir);
    Bm25Index::build(cat).save(std::filesystem::path(out_dir) / "index");
    if (rt.config().retrieval == "embedding") {
        EmbeddingIndex::build(cat, rt.embedder()).save(std::filesystem::path(out_dir) / "index");
    }
    out << "ingested " << cat.size() << " items, " << cat.vocab().entries.size() << " attributes, "
        << cat.histories().size() << " histories into " << out_dir << "\n";
    return 0;
}

int cmd_genqueries(Runtime& rt, const std::string& difficulty, std::size_t count, std::optional<std::int64_t> seed,
                   const std::string& out_path, std::ostream& out) {
    DifficultyCounts counts;
    if (difficulty == "all") {
        for (auto d : kAllDifficulties) counts[d] = count;
    } else {
        counts[parse_difficulty(difficulty)] = count;
    }
    TokenLedger ledger;
    LlmClient llm(rt.provider(), ledger);
    auto suite = generate_queries(rt.catalog(), counts, static_cast<std::uint64_t>(seed.value_or(rt.config().seed)), llm);
    save_suite(out_path, suite);
    out << "wrote " << suite.size() << " queries to " << out_path << "\n";
    return 0;
}

int cmd_ask(Runtime& rt, const std::string& query, const std::string& strategy_name, const std::string& ablate,
            std::string run_dir, const std::string& expert_file, std::ostream& out, std::ostream& err) {
    auto strategy = PlannerStrategy::parse(strategy_name).with_ablations(parse_ablations(ablate));
    auto ablations = parse_ablations(ablate);
    PatternStore store = prepare_store(rt.store(), ablations, {});
    store.ensure_embeddings(rt.embedder());
    SessionDeps deps{&store, rt.executors(), &rt.embedder(), rt.session_config()};
    TokenLedger ledger;
    LlmClient llm(rt.provider(), ledger);
    auto result = run_session(query, strategy, deps, llm);

    if (run_dir.empty()) run_dir = (std::filesystem::path(rt.config().run_dir) / ("ask-" + hex_id(query))).string();
    json traj = result.trajectory.to_json();
    write_text(std::filesystem::path(run_dir) / "trajectory.json", traj.dump(2) + "\n");
    write_text(std::filesystem::path(run_dir) / "ledger.json", ledger.snapshot().to_json().dump(2) + "\n");

    if (!expert_file.empty()) {
        std::optional<ThoughtPattern> old;
        if (!result.trajectory.pattern_id.empty()) old = rt.store().get(result.trajectory.pattern_id);
        auto pattern = distill(result.trajectory, read_text(expert_file), old, llm);
        write_text(std::filesystem::path(run_dir) / "pattern.json", pattern.to_json().dump(2) + "\n");
        err << "corrected pattern written to " << (std::filesystem::path(run_dir) / "pattern.json").string()
            << "; add it with `taira distill`\n";
    }
    if (result.ok()) {
        out << result.response->to_json().dump(2) << "\n";
        return 0;
    }
    out << json{{"failure", failure_name(*result.failure_reason)}, {"detail", result.failure_detail}}.dump(2) << "\n";
    if (!expert_file.empty()) return 0;
    err << "error[orchestrator]: session failed: " << result.failure_detail << "\n";
    return 1;
}

int cmd_evaluate(Runtime& rt, const std::string& suite_path, const std::string& strategy_name,
                 const std::string& ablate, const std::string& novel, const std::string& out_dir,
                 std::optional<std::size_t> parallelism, std::ostream& out) {
    auto suite = load_suite(suite_path);
    ExperimentConfig cfg;
    cfg.strategy = PlannerStrategy::parse(strategy_name);
    cfg.ablations = parse_ablations(ablate);
    cfg.novel_tags = split_tags(novel);
    cfg.parallelism = parallelism.value_or(static_cast<std::size_t>(rt.config().parallelism));
    cfg.seed = static_cast<std::uint64_t>(rt.config().seed);
    cfg.session = rt.session_config();
    PatternStore base = rt.store();
    base.ensure_embeddings(rt.embedder());
    ExperimentDeps deps{rt.catalog(), base, rt.executors(), rt.provider(), &rt.embedder()};
    auto report = run_experiment(suite, cfg, deps);
    report.save(out_dir);
    out << report.to_csv();
    return 0;
}

int cmd_patterns_list(Runtime& rt, std::ostream& out) {
    for (const auto& p : *rt.store().snapshot()) {
        out << p.id << "\t" << source_name(p.source) << "\t" << p.scenario_tag << "\t"
            << text::first_words(p.task_description, 12) << "\n";
    }
    return 0;
}

int cmd_patterns_show(Runtime& rt, const std::string& id, std::ostream& out) {
    auto p = rt.store().get(id);
    if (!p) throw PatternError("no pattern with id '" + id + "'");
    out << p->to_json().dump(2) << "\n";
    return 0;
}

int cmd_remove_scenario(Runtime& rt, const std::string& tag, std::ostream& out) {
    auto& store = rt.store();
    auto removed = store.remove_by_scenario(tag);
    store.save(rt.config().pattern_dir);
    out << "removed " << removed << " pattern(s) tagged " << tag << "\n";
    return 0;
}

int cmd_distill(Runtime& rt, const std::string& route_file, const std::string& opinion_file, const std::string& old_id,
                const std::string& scenario, std::ostream& out) {
    std::optional<Trajectory> route;
    if (!route_file.empty()) route = Trajectory::from_json(json::parse(read_text(route_file)));
    std::optional<std::string> opinion;
    if (!opinion_file.empty()) opinion = read_text(opinion_file);
    std::optional<ThoughtPattern> old;
    auto& store = rt.store();
    if (!old_id.empty()) {
        old = store.get(old_id);
        if (!old) throw PatternError("no pattern with id '" + old_id + "'");
    }
    TokenLedger ledger;
    LlmClient llm(rt.provider(), ledger);
    auto pattern = distill(route, opinion, old, llm);
    if (!scenario.empty()) pattern.scenario_tag = scenario;
    pattern.embedding = rt.embedder().embed(pattern.task_description);
    std::string id;
    if (old) {
        store.replace(pattern);
        id = pattern.id;
    } else {
        id = store.add(pattern);
    }
    store.save(rt.config().pattern_dir);
    out << (old ? "updated " : "added ") << id << " (" << source_name(pattern.source) << ")\n";
    return 0;
}

json read_report(const std::string& dir) {
    auto path = std::filesystem::path(dir) / "report.json";
    try {
        return json::parse(read_text(path.string()));
    } catch (const json::exception& e) {
        throw EvalError("malformed report " + path.string() + ": " + e.what());
    }
}

int cmd_report(const std::string& run, const std::string& baseline, std::ostream& out) {
    auto rep = read_report(run);
    char buf[160];
    out << "difficulty,count,HR@10,NDCG@10,SR\n";
    auto row = [&](const std::string& name, const json& m) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%.4f,%.4f\n", name.c_str(), m.at("count").get<std::size_t>(),
                      m.at("HR@10").get<double>(), m.at("NDCG@10").get<double>(), m.at("SR").get<double>());
        out << buf;
    };
    for (auto d : kAllDifficulties) {
        const std::string name(difficulty_name(d));
        if (rep.at("per_difficulty").contains(name)) row(name, rep["per_difficulty"][name]);
    }
    row("overall", rep.at("overall"));
    if (baseline.empty()) return 0;

    auto base = read_report(baseline);
    std::map<std::string, const json*> by_id;
    for (const auto& o : base.at("outcomes")) by_id[o.at("query_id")] = &o;
    std::vector<double> a_hr, b_hr, a_ndcg, b_ndcg, a_sr, b_sr;
    for (const auto& o : rep.at("outcomes")) {
        auto it = by_id.find(o.at("query_id"));
        if (it == by_id.end()) continue;
        a_hr.push_back(o.at("hr_at_10"));
        b_hr.push_back(it->second->at("hr_at_10"));
        a_ndcg.push_back(o.at("ndcg_at_10"));
        b_ndcg.push_back(it->second->at("ndcg_at_10"));
        a_sr.push_back(o.at("success").get<bool>() ? 1.0 : 0.0);
        b_sr.push_back(it->second->at("success").get<bool>() ? 1.0 : 0.0);
    }
    if (a_hr.size() < 2) throw EvalError("fewer than two shared query ids between the runs");
    out << "\nmetric,pairs,t,p\n";
    for (auto [name, a, b] : {std::tuple{"HR@10", &a_hr, &b_hr}, {"NDCG@10", &a_ndcg, &b_ndcg}, {"SR", &a_sr, &b_sr}}) {
        auto t = paired_ttest(*a, *b);
        std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%.4g%s\n", name, a->size(), t.t, t.p, t.degenerate ? " (degenerate)" : "");
        out << buf;
    }
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-agent interactive recommender"};
    app.name("taira");
    app.require_subcommand(1);
    std::string config_path;
    bool verbose = false;
    app.add_option("--config", config_path, "config file (default: $TAIRA_CONFIG)");
    app.add_flag("-v,--verbose", verbose, "log progress to stderr");
    std::vector<std::string> overrides;
    app.add_option("--set", overrides, "override a config key, e.g. --set top_k=3 (repeatable)");

    std::string catalog_path, histories_path, out_dir;
    auto* ingest = app.add_subcommand("ingest", "ingest a catalog into a store directory");
    ingest->add_option("--catalog", catalog_path, "catalog JSONL")->required();
    ingest->add_option("--histories", histories_path, "user histories JSONL");
    ingest->add_option("--out", out_dir, "store directory (default: catalog_dir)");

    std::string difficulty = "all";
    std::size_t count = 0;
    std::optional<std::int64_t> seed;
    std::string out_file;
    auto* gen = app.add_subcommand("genqueries", "generate a query suite");
    gen->add_option("--difficulty", difficulty, "easy|medium|hard|all")
        ->check(CLI::IsMember({"easy", "medium", "hard", "all"}));
    gen->add_option("--count", count, "queries per difficulty")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", seed, "random seed (default: config seed)");
    gen->add_option("--out", out_file, "suite JSONL")->required();

    std::string query, strategy = "taira", ablate, run_dir, expert_file;
    auto* ask = app.add_subcommand("ask", "answer one query");
    ask->add_option("--query", query, "user query")->required();
    ask->add_option("--strategy", strategy, "taira|taira-not|taira-noh|react|reflexion|plan-solve|zero-shot");
    ask->add_option("--ablate", ablate, "T, H, E and/or A");
    ask->add_option("--run-dir", run_dir, "where the trajectory is written");
    ask->add_option("--expert-correct", expert_file, "expert opinion file; distills a corrected pattern");

    std::string suite_path, novel;
    std::optional<std::size_t> parallelism;
    auto* evaluate = app.add_subcommand("evaluate", "run a query suite and report metrics");
    evaluate->add_option("--suite", suite_path, "suite JSONL")->required();
    evaluate->add_option("--strategy", strategy, "planner strategy");
    evaluate->add_option("--ablate", ablate, "T, H, E and/or A");
    evaluate->add_option("--novel", novel, "comma-separated scenario tags to remove from the store");
    evaluate->add_option("--out", out_dir, "report directory")->required();
    evaluate->add_option("--parallelism", parallelism, "concurrent sessions")->check(CLI::PositiveNumber);

    std::string pattern_id, tag;
    auto* patterns = app.add_subcommand("patterns", "inspect or edit the pattern store");
    patterns->require_subcommand(1);
    auto* plist = patterns->add_subcommand("list", "list patterns");
    auto* pshow = patterns->add_subcommand("show", "show one pattern");
    pshow->add_option("id", pattern_id)->required();
    auto* premove = patterns->add_subcommand("remove-scenario", "remove every pattern with a scenario tag");
    premove->add_option("tag", tag)->required();

    std::string route_file, opinion_file, old_id, scenario;
    auto* dist = app.add_subcommand("distill", "distill a pattern into the store");
    dist->add_option("--route", route_file, "trajectory JSON");
    dist->add_option("--opinion", opinion_file, "expert opinion text file");
    dist->add_option("--old", old_id, "pattern to update in place");
    dist->add_option("--scenario", scenario, "scenario tag for the pattern");

    std::string report_run, baseline;
    auto* report = app.add_subcommand("report", "print metrics of a run, optionally against a baseline");
    report->add_option("--run", report_run, "report directory")->required();
    report->add_option("--baseline", baseline, "baseline report directory for paired t-tests");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    if (dist->parsed() && route_file.empty() && opinion_file.empty()) {
        err << "usage error: distill needs --route and/or --opinion\n\n" << dist->help();
        return 2;
    }

    auto logger = spdlog::get("taira");
    if (!logger) logger = spdlog::stderr_color_mt("taira");
    spdlog::set_default_logger(logger);
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        Runtime rt(load_config(config_path, overrides));
        if (ingest->parsed()) return cmd_ingest(rt, catalog_path, histories_path, out_dir, out);
        if (gen->parsed()) return cmd_genqueries(rt, difficulty, count, seed, out_file, out);
        if (ask->parsed()) return cmd_ask(rt, query, strategy, ablate, run_dir, expert_file, out, err);
        if (evaluate->parsed()) return cmd_evaluate(rt, suite_path, strategy, ablate, novel, out_dir, parallelism, out);
        if (plist->parsed()) return cmd_patterns_list(rt, out);
        if (pshow->parsed()) return cmd_patterns_show(rt, pattern_id, out);
        if (premove->parsed()) return cmd_remove_scenario(rt, tag, out);
        if (dist->parsed()) return cmd_distill(rt, route_file, opinion_file, old_id, scenario, out);
        if (report->parsed()) return cmd_report(report_run, baseline, out);
    } catch (const Error& e) {
        err << "error[" << e.module() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error[cli]: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return 2;
}

}  // namespace taira
