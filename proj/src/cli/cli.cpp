#include "abductor/cli/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "abductor/bench/grid.hpp"
#include "abductor/bench/suites.hpp"
#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/logic/prover.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/meta/task.hpp"
#include "abductor/proposal/abstraction.hpp"
#include "abductor/proposer/proposer.hpp"

namespace abductor::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct KeyDoc {
    const char* key;
    const char* help;
};

// Order here is the order of --help and of the echoed config.
const std::vector<KeyDoc>& key_docs() {
    static const std::vector<KeyDoc> docs = {
        {"alpha", "weight of positive scores in rule selection"},
        {"max_reflection_iterations", "iteration budget per reflection stage"},
        {"max_clauses", "largest hypothesis the learner tries"},
        {"prover_depth", "resolution steps per proof"},
        {"wall_time", "learner wall-time budget (10s, 500ms, 2m)"},
        {"mode", "ilp or no-ilp"},
        {"seed", "run seed"},
        {"reflection", "enable reflection (true/false)"},
        {"expand_nl", "ask the proposer to expand the induced rule"},
        {"crop_fraction", "share of predicates cropped in stage 2"},
        {"target", "target predicate name"},
        {"max_candidates", "hypotheses scored per learn call"},
        {"verify_threshold", "score that separates positives from negatives; 0 disables"},
        {"base_url", "chat endpoint base URL"},
        {"model", "model name sent to the endpoint"},
        {"token_env", "environment variable holding the bearer token"},
        {"timeout", "per-request timeout"},
        {"max_retries", "retries on transport errors, 429 and 5xx"},
        {"backoff", "base retry backoff"},
        {"max_in_flight", "concurrent requests to the endpoint"},
        {"prompt_dir", "directory of prompt templates"},
        {"temperature", "sampling temperature"},
        {"jobs", "threads for independent tasks"},
    };
    return docs;
}

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::string env_name(const std::string& key) {
    std::string out = "ABDUCTOR_";
    for (const char c : key) {
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string as_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

double to_double(const std::string& key, const json& v) {
    if (v.is_number()) {
        return v.get<double>();
    }
    const auto s = as_text(v);
    double d = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument(key + ": expected a number, got '" + s + "'");
    }
    return d;
}

std::uint64_t to_uint(const std::string& key, const json& v) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    const auto s = as_text(v);
    std::uint64_t n = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return n;
}

bool to_bool(const std::string& key, const json& v) {
    if (v.is_boolean()) {
        return v.get<bool>();
    }
    const auto s = as_text(v);
    if (s == "true" || s == "on" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "off" || s == "0" || s == "no") {
        return false;
    }
    throw std::invalid_argument(key + ": expected true or false, got '" + s + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bench::InjectionRates parse_rates(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        v.push_back(to_double("rates", part));
    }
    if (v.size() != 3) {
        throw std::invalid_argument("rates: expected missing,redundant,wrong");
    }
    return {v[0], v[1], v[2]};
}

void print_hypothesis(std::ostream& out, const meta::Hypothesis& h) {
    for (const auto& c : h.clauses) {
        out << logic::to_string(c) << "\n";
    }
}

} // namespace

CliConfig::CliConfig() {
    const pipeline::PipelineConfig p;
    const proposer::EndpointConfig e;
    values_["alpha"] = p.alpha;
    values_["max_reflection_iterations"] = p.max_reflection_iterations;
    values_["max_clauses"] = p.budget.max_clauses;
    values_["prover_depth"] = p.budget.prover_depth;
    values_["wall_time"] = std::to_string(p.budget.wall_time.count()) + "ms";
    values_["mode"] = pipeline::to_string(p.mode);
    values_["seed"] = p.seed;
    values_["reflection"] = p.reflection;
    values_["expand_nl"] = p.expand_nl;
    values_["crop_fraction"] = p.crop_fraction;
    values_["target"] = p.target;
    values_["max_candidates"] = p.max_candidates;
    values_["verify_threshold"] = p.verify_threshold;
    values_["base_url"] = e.base_url;
    values_["model"] = e.model;
    values_["token_env"] = e.token_env;
    values_["timeout"] = std::to_string(e.timeout.count()) + "ms";
    values_["max_retries"] = e.max_retries;
    values_["backoff"] = std::to_string(e.backoff_base.count()) + "ms";
    values_["max_in_flight"] = e.max_in_flight;
    values_["prompt_dir"] = e.prompt_dir;
    values_["temperature"] = e.temperature;
    values_["jobs"] = 1;
}

const std::vector<std::string>& CliConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& d : key_docs()) {
            out.emplace_back(d.key);
        }
        return out;
    }();
    return k;
}

void CliConfig::merge_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument(path + ": config must be a flat object");
    }
    for (const auto& [k, v] : j.items()) {
        if (!values_.contains(k)) {
            throw std::invalid_argument(path + ": unknown key '" + k + "'");
        }
        if (v.is_structured() || v.is_null()) {
            throw std::invalid_argument(path + ": '" + k + "' must be a scalar");
        }
        values_[k] = v;
    }
}

void CliConfig::set(const std::string& key, const std::string& value) {
    if (!values_.contains(key)) {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

void CliConfig::merge_env(const EnvLookup& env) {
    if (!env) {
        return;
    }
    for (const auto& k : keys()) {
        if (const char* v = env(env_name(k).c_str()); v != nullptr) {
            values_[k] = std::string(v);
        }
    }
}

pipeline::PipelineConfig CliConfig::pipeline() const {
    pipeline::PipelineConfig p;
    p.alpha = to_double("alpha", values_["alpha"]);
    p.max_reflection_iterations = to_uint("max_reflection_iterations", values_["max_reflection_iterations"]);
    p.budget.max_clauses = to_uint("max_clauses", values_["max_clauses"]);
    p.budget.prover_depth = to_uint("prover_depth", values_["prover_depth"]);
    p.budget.wall_time = parse_duration(as_text(values_["wall_time"]));
    p.mode = pipeline::parse_mode(as_text(values_["mode"]));
    p.seed = to_uint("seed", values_["seed"]);
    p.reflection = to_bool("reflection", values_["reflection"]);
    p.expand_nl = to_bool("expand_nl", values_["expand_nl"]);
    p.crop_fraction = to_double("crop_fraction", values_["crop_fraction"]);
    p.target = as_text(values_["target"]);
    p.max_candidates = to_uint("max_candidates", values_["max_candidates"]);
    p.verify_threshold = to_double("verify_threshold", values_["verify_threshold"]);
    p.validate();
    return p;
}

proposer::EndpointConfig CliConfig::endpoint() const {
    proposer::EndpointConfig e;
    e.base_url = as_text(values_["base_url"]);
    e.model = as_text(values_["model"]);
    e.token_env = as_text(values_["token_env"]);
    e.timeout = parse_duration(as_text(values_["timeout"]));
    e.max_retries = to_uint("max_retries", values_["max_retries"]);
    e.backoff_base = parse_duration(as_text(values_["backoff"]));
    e.max_in_flight = to_uint("max_in_flight", values_["max_in_flight"]);
    e.prompt_dir = as_text(values_["prompt_dir"]);
    e.temperature = to_double("temperature", values_["temperature"]);
    if (e.max_in_flight == 0) {
        throw std::invalid_argument("max_in_flight must be positive");
    }
    return e;
}

int CliConfig::jobs() const {
    const auto j = to_uint("jobs", values_["jobs"]);
    if (j == 0 || j > 1024) {
        throw std::invalid_argument("jobs must be in 1..1024");
    }
    return static_cast<int>(j);
}

std::chrono::milliseconds parse_duration(const std::string& text) {
    std::string num = text;
    double scale = 1000.0;
    if (text.size() > 2 && text.compare(text.size() - 2, 2, "ms") == 0) {
        num = text.substr(0, text.size() - 2);
        scale = 1.0;
    } else if (!text.empty() && text.back() == 's') {
        num = text.substr(0, text.size() - 1);
    } else if (!text.empty() && text.back() == 'm') {
        num = text.substr(0, text.size() - 1);
        scale = 60000.0;
    }
    const double v = to_double("duration", num);
    if (v < 0) {
        throw std::invalid_argument("negative duration '" + text + "'");
    }
    const auto ms = static_cast<std::int64_t>(std::llround(v * scale));
    if (ms == 0 && v > 0) {
        throw std::invalid_argument("duration '" + text + "' is below one millisecond");
    }
    return std::chrono::milliseconds(ms);
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) {
            throw std::invalid_argument("cannot write " + tmp.string());
        }
        o << content;
        o.flush();
        if (!o) {
            throw std::invalid_argument("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

namespace {

struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App& app, const std::vector<std::string>& only = {}) {
        app.add_option("--config", file, "flat JSON config file")->check(CLI::ExistingFile);
        for (const auto& d : key_docs()) {
            if (!only.empty() && std::find(only.begin(), only.end(), d.key) == only.end()) {
                continue;
            }
            opts[d.key] = app.add_option("--" + dashed(d.key), values[d.key], d.help);
        }
    }

    CliConfig resolve(const EnvLookup& env) const {
        CliConfig c;
        if (!file.empty()) {
            c.merge_file(file);
        }
        for (const auto& [k, o] : opts) {
            if (o->count() > 0) {
                c.set(k, values.at(k));
            }
        }
        c.merge_env(env);
        return c;
    }
};

int exit_for(const pipeline::RunReport& r) {
    if (r.outcome == "rule") {
        return kOk;
    }
    return r.status == "reflection-exhausted" ? kReflectionExhausted : kNoHypothesis;
}

std::unique_ptr<proposer::Proposer> make_proposer(const std::string& spec, const CliConfig& cfg) {
    if (spec.rfind("scripted:", 0) == 0) {
        return std::make_unique<proposer::ScriptedProposer>(proposer::Fixture::load(spec.substr(9)));
    }
    if (spec == "live") {
        const auto e = cfg.endpoint();
        return std::make_unique<proposer::LiveProposer>(e, proposer::load_prompts(e.prompt_dir),
                                                        proposer::http_transport(e.base_url));
    }
    throw std::invalid_argument("--proposer must be scripted:FILE or live");
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env_in) {
    const EnvLookup env = env_in ? env_in : [](const char*) -> const char* { return nullptr; };
    CLI::App app{"Rule induction from perception proposals verified by meta-interpretive learning.", "abductor"};
    app.require_subcommand(1);

    // learn
    auto* learn = app.add_subcommand("learn", "learn from a task bundle (bk.pl, pos.pl, neg.pl, metarules.txt)");
    std::string bundle;
    learn->add_option("bundle", bundle, "task bundle directory")->required();
    ConfigFlags learn_flags;
    learn_flags.attach(*learn, {"max_clauses", "prover_depth", "wall_time"});

    // run
    auto* run = app.add_subcommand("run", "run the full pipeline on a task document");
    std::string examples;
    std::string proposer_spec;
    std::string report_path = "report.json";
    std::string record_path;
    std::string trace_path;
    run->add_option("examples", examples, "task document with target and examples")->required();
    run->add_option("--proposer", proposer_spec, "scripted:FILE or live")->required();
    run->add_option("--out", report_path, "where the RunReport is written")->capture_default_str();
    run->add_option("--record", record_path, "write the transcript as a replayable fixture");
    run->add_option("--trace", trace_path, "write reflection events, one JSON record per line");
    ConfigFlags run_flags;
    run_flags.attach(*run);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "generate a benchmark suite and score it");
    std::string suite;
    std::string rates_text = "0.503,0.860,0.280";
    std::string rule_rates_text = "0.980,0.996,0.980";
    std::size_t trials = 50;
    std::size_t n_pos = 4;
    std::size_t n_neg = 8;
    std::size_t holdout = 60;
    std::string reflection_arm = "both";
    std::string out_dir = "bench-out";
    std::string arc_dir;
    bench_cmd->add_option("suite", suite, "clevr-synth or grid-1d")->required();
    bench_cmd->add_option("--rates", rates_text, "fact injection rates missing,redundant,wrong")->capture_default_str();
    bench_cmd->add_option("--rule-rates", rule_rates_text, "proposal noise rates missing,redundant,wrong")
        ->capture_default_str();
    bench_cmd->add_option("--trials", trials, "number of generated tasks")->capture_default_str();
    bench_cmd->add_option("--n-pos", n_pos, "positives per clevr-synth task")->capture_default_str();
    bench_cmd->add_option("--n-neg", n_neg, "negatives per clevr-synth task")->capture_default_str();
    bench_cmd->add_option("--holdout", holdout, "held-out scenes for the recovery check")->capture_default_str();
    bench_cmd->add_option("--reflection-arms", reflection_arm, "on, off or both")->capture_default_str();
    bench_cmd->add_option("--arc-dir", arc_dir, "score ARC task documents from this directory instead (grid-1d)");
    bench_cmd->add_option("--out-dir", out_dir, "directory for report files")->capture_default_str();
    ConfigFlags bench_flags;
    bench_flags.attach(*bench_cmd, {"mode", "seed", "max_reflection_iterations", "wall_time", "jobs"});

    // abstract
    auto* abstract = app.add_subcommand("abstract", "print the meta-rule of each clause read from stdin");
    bool dedupe = false;
    abstract->add_flag("--dedupe", dedupe, "print each distinct meta-rule once");

    // prove
    auto* prove = app.add_subcommand("prove", "prove a goal against a program file");
    std::string program_path;
    std::string goal_text;
    std::size_t depth = logic::kDefaultProverDepth;
    bool trace = false;
    prove->add_option("program", program_path, "program file")->required();
    prove->add_option("goal", goal_text, "goal conjunction, e.g. 'p(X), q(X)'")->required();
    prove->add_option("--depth", depth, "resolution steps")->capture_default_str();
    prove->add_flag("--trace", trace, "print the derivation");

    // report
    auto* report = app.add_subcommand("report", "summarize a RunReport or a reflection trace file");
    std::string report_in;
    report->add_option("file", report_in, "RunReport JSON or trace lines")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.front()->help());
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "abductor: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (learn->parsed()) {
            const auto cfg = learn_flags.resolve(env);
            const auto p = cfg.pipeline();
            const auto task = meta::load_task_bundle(bundle);
            const auto outcome = meta::learn(task, p.budget);
            if (const auto* f = std::get_if<meta::Found>(&outcome)) {
                for (std::size_t i = 0; i < f->hypotheses.size(); ++i) {
                    if (i > 0) {
                        out << "\n";
                    }
                    print_hypothesis(out, f->hypotheses[i]);
                }
                if (f->hypotheses.front().empty()) {
                    out << "% empty hypothesis\n";
                }
                return kOk;
            }
            if (const auto* t = std::get_if<meta::Timeout>(&outcome)) {
                out << "timeout after " << t->elapsed_s << " s\n";
                return kTimeout;
            }
            out << "no hypothesis\n";
            return kNoHypothesis;
        }
        if (run->parsed()) {
            const auto cfg = run_flags.resolve(env);
            auto p = cfg.pipeline();
            const auto spec = pipeline::load_task_spec(examples);
            if (run_flags.opts.at("target")->count() == 0 && !env("ABDUCTOR_TARGET")) {
                p.target = spec.target;
            }
            auto prop = make_proposer(proposer_spec, cfg);
            auto r = pipeline::run_task(spec.examples, *prop, p);
            r.config = p.to_json();
            if (proposer_spec == "live") {
                r.config["endpoint"] = cfg.endpoint().to_json();
            }
            const auto j = pipeline::to_json(r);
            write_atomic(report_path, j.dump(2) + "\n");
            if (!trace_path.empty()) {
                write_atomic(trace_path, pipeline::trace_lines(r));
            }
            if (!record_path.empty()) {
                std::vector<proposer::Exchange> ex;
                for (const auto& e : r.transcript) {
                    ex.push_back(proposer::exchange_from_json(e));
                }
                write_atomic(record_path, proposer::Fixture::from_transcript(ex).to_json().dump(2) + "\n");
            }
            out << r.run_id << ": " << r.outcome << " (" << r.status << ")\n";
            if (r.induced) {
                out << r.induced->hypothesis.text() << "\n";
            }
            out << "report: " << report_path << "\n";
            return exit_for(r);
        }
        if (bench_cmd->parsed()) {
            const auto cfg = bench_flags.resolve(env);
            const auto p = cfg.pipeline();
            if (suite == "clevr-synth") {
                std::vector<bool> arms;
                if (reflection_arm == "both" || reflection_arm == "on") {
                    arms.push_back(true);
                }
                if (reflection_arm == "both" || reflection_arm == "off") {
                    arms.push_back(false);
                }
                if (arms.empty()) {
                    throw std::invalid_argument("--reflection-arms must be on, off or both");
                }
                bench::ClevrSynthConfig c;
                c.tasks = trials;
                c.n_pos = n_pos;
                c.n_neg = n_neg;
                c.fact_rates = parse_rates(rates_text);
                c.rule_rates = parse_rates(rule_rates_text);
                c.mode = p.mode;
                c.max_reflection_iterations = p.max_reflection_iterations;
                c.wall_time = p.budget.wall_time;
                c.holdout = holdout;
                c.seed = p.seed;
                c.jobs = cfg.jobs();
                ordered_json all = ordered_json::array();
                bench::RectificationTable table;
                std::string tasks_tsv;
                for (const bool on : arms) {
                    c.reflection = on;
                    const auto r = bench::run_clevr_synth(c);
                    const std::string arm = on ? "reflection on" : "reflection off";
                    for (const auto& [row, rect] : r.rectification()) {
                        table[row + ", " + arm] = rect;
                    }
                    tasks_tsv += "# " + arm + "\n" + bench::format_clevr_report(r);
                    all.push_back(r.to_json());
                    out << arm << ": rule recovery " << r.accuracy() << " over " << r.tasks.size() << " tasks\n";
                }
                const auto rect = bench::format_rectification_table(table);
                write_atomic(out_dir + "/clevr-synth.json", all.dump(2) + "\n");
                write_atomic(out_dir + "/clevr-synth-rectification.tsv", rect);
                write_atomic(out_dir + "/clevr-synth-tasks.tsv", tasks_tsv);
                out << rect;
                return kOk;
            }
            if (suite == "grid-1d") {
                bench::GridSuiteReport r;
                if (!arc_dir.empty()) {
                    std::vector<std::string> files;
                    for (const auto& e : fs::directory_iterator(arc_dir)) {
                        if (e.path().extension() == ".json") {
                            files.push_back(e.path().string());
                        }
                    }
                    std::sort(files.begin(), files.end());
                    std::vector<bench::ArcTask> tasks;
                    for (const auto& f : files) {
                        tasks.push_back(bench::load_arc_task(f));
                    }
                    r = bench::run_grid_tasks(tasks, cfg.jobs());
                } else {
                    bench::GridSuiteConfig g;
                    g.tasks = trials;
                    g.seed = p.seed;
                    g.jobs = cfg.jobs();
                    r = bench::run_grid1d(g);
                }
                const auto text = bench::format_grid_report(r);
                write_atomic(out_dir + "/grid-1d.json", r.to_json().dump(2) + "\n");
                write_atomic(out_dir + "/grid-1d.tsv", text);
                out << "grid-1d: accuracy " << r.accuracy() << ", mean hamming " << r.mean_hamming()
                    << " (unchanged input " << r.mean_baseline_hamming() << ")\n";
                return kOk;
            }
            err << "abductor: unknown suite '" << suite << "' (expected clevr-synth or grid-1d)\n";
            return kUsage;
        }
        if (abstract->parsed()) {
            std::ostringstream ss;
            ss << std::cin.rdbuf();
            const auto program = logic::parse_program(ss.str());
            std::vector<meta::MetaRule> ms;
            for (const auto& c : program.clauses()) {
                ms.push_back(proposal::abstract_rule(c));
            }
            if (dedupe) {
                ms = proposal::dedupe_metarules(ms);
            }
            for (const auto& m : ms) {
                out << m.encode() << "\n";
            }
            return kOk;
        }
        if (prove->parsed()) {
            const auto program = logic::parse_program(read_text(program_path));
            const auto goals = logic::parse_goals(goal_text);
            logic::ProveOptions o;
            o.depth = depth;
            o.trace = trace;
            const auto r = logic::prove(program, goals, o);
            out << logic::to_string(r.status) << " (" << r.inferences << " inferences"
                << (r.limit_hit ? ", limit hit" : "") << ")\n";
            for (const auto& line : r.trace) {
                out << line << "\n";
            }
            return kOk;
        }
        if (report->parsed()) {
            const auto text = read_text(report_in);
            json doc;
            try {
                doc = json::parse(text);
            } catch (const json::parse_error&) {
                doc = nullptr;
            }
            if (doc.is_object() && doc.contains("run_id") && doc.contains("outcome")) {
                out << "run " << doc["run_id"].get<std::string>() << ": " << doc["outcome"].get<std::string>() << " ("
                    << doc["status"].get<std::string>() << "), mode " << doc.value("mode", "?") << "\n";
                if (doc["induced"].is_object()) {
                    out << "rule: " << doc["induced"]["rule"].get<std::string>() << "\n";
                    out << "reads: " << doc["induced"]["natural_text"].get<std::string>() << "\n";
                    out << "score: " << doc["induced"]["score"].dump() << "\n";
                }
                out << "learn calls: " << doc.value("learn_calls", 0) << "\n";
                out << "reflection events: " << doc["reflection_trace"].size() << "\n";
                for (const auto& e : doc["reflection_trace"]) {
                    out << "  stage " << e["stage"].dump() << " iteration " << e["iteration"].dump() << ": "
                        << e["event"].get<std::string>() << "\n";
                }
                return kOk;
            }
            // line-delimited trace records
            std::istringstream lines(text);
            std::string line;
            std::size_t n = 0;
            while (std::getline(lines, line)) {
                if (line.empty()) {
                    continue;
                }
                json e;
                try {
                    e = json::parse(line);
                } catch (const json::parse_error& pe) {
                    throw std::invalid_argument(report_in + ": neither a RunReport nor trace lines: " + pe.what());
                }
                out << e.value("run_id", "?") << " stage " << e.at("stage").dump() << " iteration "
                    << e.at("iteration").dump() << ": " << e.at("event").get<std::string>() << "\n";
                ++n;
            }
            out << n << " events\n";
            return kOk;
        }
    } catch (const TransportError& e) {
        err << "abductor: transport: " << e.what() << "\n";
        return kTransport;
    } catch (const Error& e) {
        err << "abductor: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "abductor: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception& e) {
        err << "abductor: " << e.what() << "\n";
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        err << "abductor: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "abductor: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

} // namespace abductor::cli
