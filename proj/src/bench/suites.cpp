#include "abductor/bench/suites.hpp"

#include <cstdio>
#include <exception>
#include <random>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "abductor/bench/simulated.hpp"
#include "abductor/logic/parser.hpp"

namespace abductor::bench {

using nlohmann::ordered_json;

namespace {

template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
    std::exception_ptr error;
    const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
    const int nt = jobs > 0 ? jobs : 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
#else
    (void)jobs;
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(abductor_suite_error)
#endif
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

ordered_json rates_json(const InjectionRates& r) {
    return ordered_json{{"missing", r.missing}, {"redundant", r.redundant}, {"wrong", r.wrong}};
}

ordered_json rect_json(const Rectification& r) {
    auto cell = [](const RateCount& c) {
        return ordered_json{{"rate", c.rate()}, {"events", c.events}, {"rectified", c.rectified}};
    };
    return ordered_json{{"missing", cell(r.missing)}, {"redundant", cell(r.redundant)}, {"wrong", cell(r.wrong)}};
}

std::vector<logic::Atom> parse_facts(const std::vector<std::string>& texts) {
    std::vector<logic::Atom> out;
    for (const auto& t : texts) {
        out.push_back(logic::parse_atom(t));
    }
    return out;
}

ClevrTaskResult run_one(const ClevrSynthConfig& cfg, std::size_t i) {
    const auto tag = std::to_string(i);
    const std::size_t size = cfg.rule_sizes[i % cfg.rule_sizes.size()];
    const auto rule = random_rule(size, derive_seed(cfg.seed, "rule:" + tag), "r" + tag);
    const auto scenes = gen_scenes(rule, cfg.n_pos, cfg.n_neg, derive_seed(cfg.seed, "scenes:" + tag), "t" + tag + "_s");

    SimulationConfig sim{cfg.fact_rates, cfg.rule_rates, derive_seed(cfg.seed, "sim:" + tag)};
    SimulatedProposer proposer(scenes, rule, sim);
    std::vector<pipeline::ExampleDescriptor> examples;
    for (const auto& s : scenes) {
        examples.push_back({s.id, s.label, describe(s)});
    }
    pipeline::PipelineConfig pc;
    pc.mode = cfg.mode;
    pc.reflection = cfg.reflection;
    pc.max_reflection_iterations = cfg.max_reflection_iterations;
    pc.seed = derive_seed(cfg.seed, "pipeline:" + tag);
    // every generating rule is a single clause
    pc.budget.max_clauses = 1;
    pc.budget.wall_time = cfg.wall_time;
    const auto report = pipeline::run_task(examples, proposer, pc);

    ClevrTaskResult r;
    r.id = "t" + tag;
    r.rule = logic::to_string(rule.clause);
    r.rule_size = size;
    r.status = report.status;
    r.learn_calls = report.learn_calls;
    if (report.induced) {
        r.learned = report.induced->hypothesis.text();
        r.recovered = equivalent_on(report.induced->hypothesis.clauses, rule,
                                    holdout_scenes(rule, cfg.holdout, derive_seed(cfg.seed, "holdout:" + tag)));
    }
    for (const auto& [key, log] : proposer.logs()) {
        const auto ex = key.substr(key.find('/') + 1);
        const auto it = report.final_facts.find(ex);
        r.rectification += rectification_report(log, it == report.final_facts.end() ? std::vector<logic::Atom>{}
                                                                                     : parse_facts(it->second));
    }
    return r;
}

} // namespace

bool equivalent_on(const std::vector<logic::Clause>& learned, const SceneRule& truth, const std::vector<Scene>& scenes) {
    if (learned.empty()) {
        return false;
    }
    const std::set<std::string> unary(attribute_predicates().begin(), attribute_predicates().end());
    const auto target = truth.clause.head.predicate;
    std::vector<logic::Clause> scoped;
    for (const auto& c : learned) {
        scoped.push_back(pipeline::scope_clause(c, unary, target));
    }
    for (const auto& s : scenes) {
        if (satisfies(s, truth.clause) != satisfies_scoped(s, scoped, target)) {
            return false;
        }
    }
    return true;
}

std::vector<Scene> holdout_scenes(const SceneRule& truth, std::size_t n, std::uint64_t seed) {
    const std::size_t near = n / 2;
    auto out = gen_scenes(truth, near / 2, near - near / 2, seed, "h");
    std::mt19937_64 rng(derive_seed(seed, "random"));
    for (std::size_t i = out.size(); i < n; ++i) {
        out.push_back(random_scene("h" + std::to_string(i), 2 + rng() % 3, rng));
    }
    return out;
}

ordered_json ClevrSynthConfig::to_json() const {
    return ordered_json{{"tasks", tasks},
                        {"n_pos", n_pos},
                        {"n_neg", n_neg},
                        {"rule_sizes", rule_sizes},
                        {"fact_rates", rates_json(fact_rates)},
                        {"rule_rates", rates_json(rule_rates)},
                        {"mode", pipeline::to_string(mode)},
                        {"reflection", reflection},
                        {"max_reflection_iterations", max_reflection_iterations},
                        {"wall_time_ms", wall_time.count()},
                        {"holdout", holdout},
                        {"seed", seed}};
}

double ClevrSynthReport::accuracy() const {
    if (tasks.empty()) {
        return 0.0;
    }
    std::size_t ok = 0;
    for (const auto& t : tasks) {
        ok += t.recovered ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(tasks.size());
}

RectificationTable ClevrSynthReport::rectification() const {
    RectificationTable t;
    for (const auto& r : tasks) {
        t["Facts (" + std::to_string(r.rule_size) + ")"] += r.rectification;
    }
    return t;
}

Rectification ClevrSynthReport::rectification_total() const {
    Rectification total;
    for (const auto& r : tasks) {
        total += r.rectification;
    }
    return total;
}

ordered_json ClevrSynthReport::to_json() const {
    ordered_json j;
    j["suite"] = "clevr-synth";
    j["config"] = config.to_json();
    j["accuracy"] = accuracy();
    ordered_json rows = ordered_json::object();
    for (const auto& [k, v] : rectification()) {
        rows[k] = rect_json(v);
    }
    j["rectification"] = rows;
    j["rectification_total"] = rect_json(rectification_total());
    j["tasks"] = ordered_json::array();
    for (const auto& t : tasks) {
        j["tasks"].push_back({{"id", t.id},
                              {"rule", t.rule},
                              {"rule_size", t.rule_size},
                              {"status", t.status},
                              {"learned", t.learned},
                              {"recovered", t.recovered},
                              {"learn_calls", t.learn_calls},
                              {"rectification", rect_json(t.rectification)}});
    }
    return j;
}

ClevrSynthReport run_clevr_synth(const ClevrSynthConfig& cfg) {
    if (cfg.rule_sizes.empty()) {
        throw std::invalid_argument("clevr-synth needs at least one rule size");
    }
    ClevrSynthReport out;
    out.config = cfg;
    out.tasks.resize(cfg.tasks);
    parallel_for(cfg.tasks, cfg.jobs, [&](std::size_t i) { out.tasks[i] = run_one(cfg, i); });
    return out;
}

std::string format_clevr_report(const ClevrSynthReport& r) {
    std::string out = "task\trule_size\tstatus\trecovered\tlearned\n";
    for (const auto& t : r.tasks) {
        out += t.id + "\t" + std::to_string(t.rule_size) + "\t" + t.status + "\t" + (t.recovered ? "yes" : "no") + "\t" +
               (t.learned.empty() ? "-" : t.learned) + "\n";
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "\nmode %s, reflection %s: rule recovery %.3f over %zu tasks\n\n",
                  pipeline::to_string(r.config.mode), r.config.reflection ? "on" : "off", r.accuracy(), r.tasks.size());
    out += buf;
    out += format_rectification_table(r.rectification());
    return out;
}

bool VoteSuiteReport::all_match() const {
    for (const auto& [cls, key] : expected) {
        const auto it = results.find(cls);
        if (it == results.end() || it->second.rule != key) {
            return false;
        }
    }
    return !expected.empty();
}

VoteSuiteReport run_vote_suite(const VoteSuiteConfig& cfg) {
    const std::set<std::string> unary(attribute_predicates().begin(), attribute_predicates().end());
    std::map<std::string, SceneRule> rules;
    std::map<std::string, std::vector<Scene>> pools;
    std::map<std::string, std::size_t> sizes;
    VoteSuiteReport out;
    for (const auto& r : clevr_hans_rules()) {
        rules[r.name] = r;
        pools[r.name] = gen_scenes(r, cfg.per_class, 0, derive_seed(cfg.seed, "pool:" + r.name), "p");
        sizes[r.name] = cfg.per_class;
        out.expected[r.name] = rule_key({pipeline::scope_clause(r.clause, unary, r.clause.head.predicate)});
    }
    const GroupRunner run = [&](const std::string& cls, std::size_t g, const std::vector<std::size_t>& members)
        -> std::optional<std::string> {
        const auto& rule = rules.at(cls);
        const auto tag = cls + ":" + std::to_string(g);
        std::vector<Scene> scenes;
        for (std::size_t k = 0; k < members.size(); ++k) {
            auto s = pools.at(cls)[members[k]];
            s.id = "g" + std::to_string(g) + "_pos" + std::to_string(k);
            scenes.push_back(std::move(s));
        }
        for (auto& s : gen_scenes(rule, 0, cfg.n_neg, derive_seed(cfg.seed, "neg:" + tag), "g" + std::to_string(g) + "_neg")) {
            scenes.push_back(std::move(s));
        }
        SimulatedProposer proposer(scenes, rule, {cfg.fact_rates, cfg.rule_rates, derive_seed(cfg.seed, "sim:" + tag)});
        std::vector<pipeline::ExampleDescriptor> examples;
        for (const auto& s : scenes) {
            examples.push_back({s.id, s.label, describe(s)});
        }
        pipeline::PipelineConfig pc;
        pc.seed = derive_seed(cfg.seed, "pipeline:" + tag);
        pc.budget.max_clauses = 1;
        const auto report = pipeline::run_task(examples, proposer, pc);
        if (!report.induced) {
            return std::nullopt;
        }
        std::vector<logic::Clause> lifted;
        for (const auto& c : report.induced->hypothesis.clauses) {
            lifted.push_back(pipeline::scope_clause(c, unary, rule.clause.head.predicate));
        }
        return rule_key(lifted);
    };
    out.results = cfg.jobs > 1 ? sample_then_vote_parallel(sizes, cfg.vote, run, cfg.jobs)
                               : sample_then_vote(sizes, cfg.vote, run);
    return out;
}

double GridSuiteReport::mean_hamming() const {
    double s = 0;
    for (const auto& t : tasks) {
        s += static_cast<double>(t.hamming);
    }
    return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

double GridSuiteReport::mean_baseline_hamming() const {
    double s = 0;
    for (const auto& t : tasks) {
        s += static_cast<double>(t.baseline_hamming);
    }
    return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

double GridSuiteReport::accuracy() const {
    std::size_t ok = 0;
    for (const auto& t : tasks) {
        ok += t.exact ? 1 : 0;
    }
    return tasks.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(tasks.size());
}

ordered_json GridSuiteReport::to_json() const {
    ordered_json j;
    j["suite"] = "grid-1d";
    j["accuracy"] = accuracy();
    j["mean_hamming"] = mean_hamming();
    j["mean_baseline_hamming"] = mean_baseline_hamming();
    j["tasks"] = ordered_json::array();
    for (const auto& t : tasks) {
        j["tasks"].push_back({{"id", t.id},
                              {"transform", t.transform},
                              {"hamming", t.hamming},
                              {"baseline_hamming", t.baseline_hamming},
                              {"exact", t.exact}});
    }
    return j;
}

GridSuiteReport run_grid_tasks(const std::vector<ArcTask>& tasks, int jobs) {
    GridSuiteReport out;
    out.tasks.resize(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const auto& t = tasks[i];
        const auto sol = solve_grid_task(t);
        GridTaskResult r;
        r.id = t.id;
        r.transform = sol.transform;
        r.exact = !t.test.empty();
        for (std::size_t k = 0; k < t.test.size(); ++k) {
            const auto d = hamming(sol.predictions[k], t.test[k].output);
            r.hamming += d;
            r.baseline_hamming += hamming(t.test[k].input, t.test[k].output);
            r.exact = r.exact && d == 0;
        }
        out.tasks[i] = std::move(r);
    });
    return out;
}

GridSuiteReport run_grid1d(const GridSuiteConfig& cfg) {
    std::vector<ArcTask> tasks;
    for (std::size_t i = 0; i < cfg.tasks; ++i) {
        auto t = gen_grid1d_task(derive_seed(cfg.seed, "grid:" + std::to_string(i)), cfg.n_train, cfg.width);
        t.id = "g" + std::to_string(i);
        tasks.push_back(std::move(t));
    }
    return run_grid_tasks(tasks, cfg.jobs);
}

std::string format_grid_report(const GridSuiteReport& r) {
    std::string out = "task\ttransform\thamming\tbaseline\n";
    for (const auto& t : r.tasks) {
        out += t.id + "\t" + (t.transform.empty() ? "-" : t.transform) + "\t" + std::to_string(t.hamming) + "\t" +
               std::to_string(t.baseline_hamming) + "\n";
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "\nexact %.3f, mean hamming %.3f (unchanged input %.3f) over %zu tasks\n",
                  r.accuracy(), r.mean_hamming(), r.mean_baseline_hamming(), r.tasks.size());
    return out + buf;
}

} // namespace abductor::bench
