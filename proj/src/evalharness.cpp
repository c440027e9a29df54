#include "taira/evalharness.hpp"

#include "taira/errors.hpp"
#include "taira/text.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

namespace taira {

using nlohmann::json;

double hr_at_10(const SimVerdict& verdict) {
    std::size_t slots = 0;
    std::size_t hits = 0;
    for (const auto& list : verdict.score_lists) {
        for (double s : list) {
            ++slots;
            if (s >= kHitThreshold) ++hits;
        }
    }
    return slots == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(slots);
}

double ndcg_at_10(const std::vector<double>& gains) {
    const std::size_t n = std::min<std::size_t>(10, gains.size());
    auto dcg = [n](const std::vector<double>& g) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += g[i] / std::log2(static_cast<double>(i) + 2.0);
        return sum;
    };
    std::vector<double> ideal = gains;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double idcg = dcg(ideal);
    return idcg == 0.0 ? 0.0 : dcg(gains) / idcg;
}

double ndcg_at_10(const SimVerdict& verdict) {
    if (verdict.score_lists.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& list : verdict.score_lists) sum += ndcg_at_10(list);
    return sum / static_cast<double>(verdict.score_lists.size());
}

json QueryOutcome::to_json() const {
    json j = {{"query_id", spec.query_id},
              {"scenario", scenario_name(spec.scenario)},
              {"difficulty", difficulty_name(spec.difficulty)},
              {"success", success()},
              {"hr_at_10", hr()},
              {"ndcg_at_10", ndcg()},
              {"failure", failure ? json(std::string(failure_name(*failure))) : json(nullptr)},
              {"failure_detail", failure_detail},
              {"verdict", verdict ? verdict->to_json() : json(nullptr)},
              {"guidance", guidance_name(trajectory.guidance)},
              {"pattern_id", trajectory.pattern_id},
              {"phases", trajectory.phases()},
              {"planner_subtasks", 0},
              {"ledger", ledger.to_json(false)}};
    std::size_t planners = 0;
    for (const auto& p : trajectory.plans) {
        for (const auto& t : p.sub_tasks) planners += t.agent == AgentKind::Planner;
    }
    j["planner_subtasks"] = planners;
    return j;
}

double success_rate(const std::vector<QueryOutcome>& outcomes) {
    if (outcomes.empty()) throw EvalError("success rate of an empty outcome set");
    std::size_t ok = 0;
    for (const auto& o : outcomes) ok += o.success();
    return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw EvalError("paired t-test needs equal lengths");
    if (a.size() < 2) throw EvalError("paired t-test needs at least two pairs");
    const auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    TTestResult r;
    if (sd == 0.0) {
        if (mean == 0.0) return r;
        r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        r.degenerate = true;
        return r;
    }
    r.t = mean / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1.0);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    return r;
}

json Metrics::to_json() const { return {{"count", count}, {"HR@10", hr}, {"NDCG@10", ndcg}, {"SR", sr}}; }

Metrics aggregate(const std::vector<const QueryOutcome*>& outcomes) {
    Metrics m;
    m.count = outcomes.size();
    if (outcomes.empty()) return m;
    std::size_t ok = 0;
    for (const auto* o : outcomes) {
        m.hr += o->hr();
        m.ndcg += o->ndcg();
        ok += o->success();
    }
    const auto n = static_cast<double>(outcomes.size());
    m.hr /= n;
    m.ndcg /= n;
    m.sr = static_cast<double>(ok) / n;
    return m;
}

std::set<char> parse_ablations(const std::string& spec) {
    std::set<char> out;
    for (char c : spec) {
        if (c == ',' || c == ' ') continue;
        const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (u != 'T' && u != 'H' && u != 'E' && u != 'A') throw EvalError(std::string("unknown ablation '") + c + "'");
        out.insert(u);
    }
    return out;
}

PatternStore prepare_store(const PatternStore& base, const std::set<char>& ablations,
                           const std::set<std::string>& novel_tags) {
    PatternStore store = base;
    for (const auto& tag : novel_tags) store.remove_by_scenario(tag);
    if (ablations.count('E')) store = store.filter_sources({PatternSource::AgentSuccess});
    if (ablations.count('A'))
        store = store.filter_sources({PatternSource::AgentFailedExpertCorrected, PatternSource::ExpertDirect});
    return store;
}

json RunReport::to_json() const {
    json per = json::object();
    for (const auto& [d, m] : per_difficulty) per[d] = m.to_json();
    json outs = json::array();
    for (const auto& o : outcomes) outs.push_back(o.to_json());
    return {{"config", {{"strategy", strategy}, {"ablations", ablations}, {"novel_tags", novel_tags}, {"seed", seed}}},
            {"overall", overall.to_json()},
            {"per_difficulty", per},
            {"store", {{"size", store_size}, {"sources", store_sources}}},
            {"ledger", ledger.to_json(false)},
            {"outcomes", outs}};
}

std::string RunReport::to_csv() const {
    std::string out = "difficulty,count,HR@10,NDCG@10,SR\n";
    auto line = [&](const std::string& name, const Metrics& m) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%.4f,%.4f\n", name.c_str(), m.count, m.hr, m.ndcg, m.sr);
        out += buf;
    };
    for (auto d : kAllDifficulties) {
        auto it = per_difficulty.find(std::string(difficulty_name(d)));
        if (it != per_difficulty.end()) line(it->first, it->second);
    }
    line("overall", overall);
    return out;
}

void RunReport::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream j(dir / "report.json");
    std::ofstream c(dir / "metrics.csv");
    if (!j || !c) throw EvalError("cannot write report into " + dir.string());
    j << to_json().dump(2) << "\n";
    c << to_csv();
}

namespace {

QueryOutcome evaluate_one(const QuerySpec& spec, const ExperimentConfig& config, const SessionDeps& sdeps,
                          const ExperimentDeps& deps) {
    QueryOutcome out;
    out.spec = spec;
    TokenLedger ledger;
    LlmClient llm(deps.provider, ledger);
    try {
        FeedbackFn feedback = [&](const RecommendationResponse& r) -> std::optional<std::string> {
            auto v = judge(spec, r, deps.catalog, llm);
            if (!v.failed) return std::nullopt;
            return v.reason.empty() ? std::string("the recommendation did not meet the request") : v.reason;
        };
        auto session = run_session(spec.query_text, config.strategy, sdeps, llm, feedback,
                                   std::string(scenario_name(spec.scenario)));
        out.trajectory = std::move(session.trajectory);
        if (session.failure_reason) {
            out.failure = session.failure_reason;
            out.failure_detail = session.failure_detail;
        } else {
            out.verdict = judge(spec, *session.response, deps.catalog, llm);
        }
    } catch (const std::exception& e) {
        // Per-query errors never abort the batch.
        out.failure = FailureReason::ExecutorFailure;
        out.failure_detail = e.what();
        out.verdict.reset();
    }
    out.ledger = ledger.snapshot();
    return out;
}

}  // namespace

RunReport run_experiment(const std::vector<QuerySpec>& suite, const ExperimentConfig& config,
                         const ExperimentDeps& deps) {
    if (suite.empty()) throw EvalError("empty query suite");
    if (config.parallelism == 0) throw EvalError("parallelism must be positive");
    {
        std::set<std::string> ids;
        for (const auto& q : suite) {
            if (!ids.insert(q.query_id).second) throw EvalError("duplicate query id '" + q.query_id + "'");
        }
    }

    const PlannerStrategy strategy = config.strategy.with_ablations(config.ablations);
    ExperimentConfig effective = config;
    effective.strategy = strategy;
    const PatternStore store = prepare_store(deps.store, config.ablations, config.novel_tags);

    SessionDeps sdeps{&store, deps.executors, deps.pattern_embedder, config.session};

    std::vector<QueryOutcome> outcomes(suite.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < suite.size(); i = next++) outcomes[i] = evaluate_one(suite[i], effective, sdeps, deps);
    };
    const std::size_t threads = std::min(config.parallelism, suite.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::sort(outcomes.begin(), outcomes.end(),
              [](const QueryOutcome& a, const QueryOutcome& b) { return a.spec.query_id < b.spec.query_id; });

    RunReport report;
    report.strategy = strategy.name();
    for (char c : config.ablations) report.ablations += c;
    report.novel_tags.assign(config.novel_tags.begin(), config.novel_tags.end());
    report.seed = config.seed;
    report.store_size = store.size();
    for (const auto& p : *store.snapshot()) ++report.store_sources[std::string(source_name(p.source))];

    std::vector<const QueryOutcome*> all;
    std::map<std::string, std::vector<const QueryOutcome*>> by_difficulty;
    for (const auto& o : outcomes) {
        all.push_back(&o);
        by_difficulty[std::string(difficulty_name(o.spec.difficulty))].push_back(&o);
        report.ledger += o.ledger;
    }
    for (const auto& [d, list] : by_difficulty) report.per_difficulty[d] = aggregate(list);
    report.overall = aggregate(all);
    report.outcomes = std::move(outcomes);
    return report;
}

}  // namespace taira
