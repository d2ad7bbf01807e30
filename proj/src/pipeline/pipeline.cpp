#include "abductor/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/logic/prover.hpp"

namespace abductor::pipeline {

using logic::Atom;
using logic::Clause;
using logic::Term;
using proposer::ProposerRequest;
using proposer::RequestKind;
using json = nlohmann::json;

const char* to_string(Mode m) noexcept { return m == Mode::Ilp ? "ilp" : "no-ilp"; }

Mode parse_mode(std::string_view s) {
    if (s == "ilp") {
        return Mode::Ilp;
    }
    if (s == "no-ilp") {
        return Mode::NoIlp;
    }
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

TaskSpec parse_task_spec(const json& j) {
    TaskSpec t;
    try {
        t.target = j.value("target", "target");
        for (const auto& e : j.at("examples")) {
            ExampleDescriptor d;
            d.id = e.at("id").get<std::string>();
            d.label = proposal::parse_label(e.at("label").get<std::string>());
            d.descriptor = e.value("descriptor", "");
            t.examples.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad task document: ") + e.what());
    }
    return t;
}

TaskSpec load_task_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read task document " + path);
    }
    try {
        return parse_task_spec(json::parse(in));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void PipelineConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0,1)");
    }
    if (!(crop_fraction > 0.0 && crop_fraction < 1.0)) {
        throw std::invalid_argument("crop fraction must lie in (0,1)");
    }
    if (!(verify_threshold >= 0.0 && verify_threshold <= 1.0)) {
        throw std::invalid_argument("verify threshold must lie in [0,1]");
    }
    if (max_candidates == 0) {
        throw std::invalid_argument("max_candidates must be positive");
    }
    if (!logic::is_identifier(target)) {
        throw std::invalid_argument("target '" + target + "' is not a predicate name");
    }
    (void)budget.validated();
}

ordered_json PipelineConfig::to_json() const {
    ordered_json j;
    j["alpha"] = alpha;
    j["max_reflection_iterations"] = max_reflection_iterations;
    j["budget"] = {{"max_clauses", budget.max_clauses},
                   {"prover_depth", budget.prover_depth},
                   {"wall_time_ms", budget.wall_time.count()}};
    j["mode"] = to_string(mode);
    j["seed"] = seed;
    j["reflection"] = reflection;
    j["expand_nl"] = expand_nl;
    j["crop_fraction"] = crop_fraction;
    j["target"] = target;
    j["max_candidates"] = max_candidates;
    j["verify_threshold"] = verify_threshold;
    return j;
}

ordered_json to_json(const RunReport& r) {
    ordered_json j;
    j["run_id"] = r.run_id;
    j["outcome"] = r.outcome;
    j["status"] = r.status;
    j["mode"] = to_string(r.mode);
    if (r.induced) {
        const auto& ir = *r.induced;
        ordered_json ind;
        ind["rule"] = ir.hypothesis.text();
        ind["clauses"] = ordered_json::array();
        for (const auto& c : ir.hypothesis.clauses) {
            ind["clauses"].push_back(logic::to_string(c));
        }
        ind["natural_text"] = ir.natural_text;
        if (!ir.expansion.empty()) {
            ind["expansion"] = ir.expansion;
        }
        ind["score"] = ir.score;
        ind["per_example_scores"] = ir.per_example_scores;
        ind["provenance"] = ordered_json::array();
        for (const auto& p : ir.hypothesis.provenance) {
            ordered_json pj;
            pj["metarule"] = p.metarule;
            pj["bindings"] = ordered_json::object();
            for (const auto& [k, v] : p.bindings) {
                pj["bindings"][k] = v;
            }
            ind["provenance"].push_back(pj);
        }
        j["induced"] = ind;
    } else {
        j["induced"] = nullptr;
    }
    j["metarules"] = r.metarules;
    j["reflection_trace"] = ordered_json::array();
    for (const auto& e : r.trace) {
        j["reflection_trace"].push_back(
            {{"stage", e.stage}, {"event", e.event}, {"iteration", e.iteration}, {"detail", e.detail}});
    }
    j["final_facts"] = r.final_facts;
    j["cropped"] = r.cropped;
    j["quarantine"] = ordered_json::array();
    for (const auto& q : r.quarantine) {
        j["quarantine"].push_back({{"example_id", q.example_id}, {"reason", q.reason}, {"raw", q.raw}});
    }
    j["low_confidence"] = r.low_confidence;
    j["notes"] = r.notes;
    j["learn_calls"] = r.learn_calls;
    j["config"] = r.config;
    j["timings"] = r.timings;
    j["transcript"] = r.transcript;
    return j;
}

ordered_json strip_volatile(ordered_json report) {
    report.erase("timings");
    if (report.contains("transcript")) {
        for (auto& e : report["transcript"]) {
            e.erase("ts_ms");
            e.erase("latency_ms");
        }
    }
    return report;
}

std::string trace_lines(const RunReport& r) {
    std::string out;
    for (const auto& e : r.trace) {
        ordered_json j;
        j["run_id"] = r.run_id;
        j["stage"] = e.stage;
        j["event"] = e.event;
        j["iteration"] = e.iteration;
        j["detail"] = e.detail;
        out += j.dump() + "\n";
    }
    return out;
}

double selection_score(const std::vector<double>& pos, const std::vector<double>& neg, double alpha) {
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    return alpha * mean(pos) - (1.0 - alpha) * mean(neg);
}

std::size_t select_index(const std::vector<std::string>& texts, const std::vector<std::vector<double>>& pos,
                         const std::vector<std::vector<double>>& neg, double alpha) {
    if (texts.empty()) {
        throw std::invalid_argument("select_rule needs at least one candidate");
    }
    if (pos.size() != texts.size() || neg.size() != texts.size()) {
        throw std::invalid_argument("score table does not match the candidate list");
    }
    for (std::size_t i = 1; i < texts.size(); ++i) {
        if (pos[i].size() != pos[0].size() || neg[i].size() != neg[0].size()) {
            throw std::invalid_argument("every candidate needs a score for every example");
        }
    }
    std::size_t best = 0;
    double best_score = selection_score(pos[0], neg[0], alpha);
    for (std::size_t i = 1; i < texts.size(); ++i) {
        const double s = selection_score(pos[i], neg[i], alpha);
        const double tol = 1e-12 * std::max({1.0, std::abs(s), std::abs(best_score)});
        if (s > best_score + tol || (std::abs(s - best_score) <= tol && texts[i] < texts[best])) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

InducedRule select_rule(const std::vector<meta::Hypothesis>& candidates, const std::vector<std::vector<double>>& pos,
                        const std::vector<std::vector<double>>& neg, double alpha, const std::string& target) {
    std::vector<std::string> texts;
    for (const auto& h : candidates) {
        texts.push_back(h.text());
    }
    const auto i = select_index(texts, pos, neg, alpha);
    InducedRule r;
    r.hypothesis = candidates[i];
    r.natural_text = naturalize(r.hypothesis, target);
    r.score = selection_score(pos[i], neg[i], alpha);
    return r;
}

namespace {

std::string render_atom(const Atom& a, const std::string& head_var) {
    std::vector<std::string> args;
    for (const auto& t : a.args) {
        args.push_back(logic::to_string(t));
    }
    const bool scoped = !args.empty() && args[0] == head_var;
    if (args.empty() || (args.size() == 1 && scoped)) {
        return a.predicate + " holds";
    }
    if (args.size() == 1) {
        return args[0] + " has " + a.predicate;
    }
    if (args.size() == 2 && scoped) {
        return args[1] + " has " + a.predicate;
    }
    const std::size_t from = scoped ? 1 : 0;
    std::string out = a.predicate + " holds between ";
    for (std::size_t i = from; i < args.size(); ++i) {
        if (i > from) {
            out += " and ";
        }
        out += args[i];
    }
    return out;
}

} // namespace

std::string naturalize(const meta::Hypothesis& h, const std::string& target) {
    if (h.clauses.empty()) {
        return target + " never holds";
    }
    if (h.clauses.size() == 1 && h.clauses[0].body.empty()) {
        return target + " always holds";
    }
    std::string out = target + " holds when: ";
    for (std::size_t i = 0; i < h.clauses.size(); ++i) {
        const auto& c = h.clauses[i];
        if (i > 0) {
            out += " or ";
        }
        const std::string head_var =
            c.head.args.size() == 1 && c.head.args[0].is_variable() ? c.head.args[0].name : std::string();
        if (c.body.empty()) {
            out += "always";
            continue;
        }
        for (std::size_t k = 0; k < c.body.size(); ++k) {
            if (k > 0) {
                out += " and ";
            }
            out += render_atom(c.body[k], head_var);
        }
    }
    return out;
}

std::string wrapper_name(const Atom& fact) {
    std::string out = fact.predicate;
    for (const auto& t : fact.args) {
        out += '_';
        for (const char c : logic::to_string(t)) {
            out += std::isalnum(static_cast<unsigned char>(c)) != 0 ? c : '_';
        }
    }
    return out;
}

Clause scope_clause(const Clause& c, const std::set<std::string>& unary_fact_predicates, const std::string& target) {
    const bool var_head = c.head.args.size() == 1 && c.head.args[0].is_variable();
    if (var_head && !c.body.empty()) {
        const auto& hv = c.head.args[0];
        const bool monadic = std::all_of(c.body.begin(), c.body.end(), [&](const Atom& a) {
            return a.args.size() == 1 && a.args[0] == hv && unary_fact_predicates.count(a.predicate) == 0;
        });
        const bool scoped = std::all_of(c.body.begin(), c.body.end(),
                                        [&](const Atom& a) { return a.args.size() >= 2 && a.args[0] == hv; });
        if (monadic || scoped) {
            Clause out = c;
            out.head.predicate = target;
            return out;
        }
    }
    // Fresh scene variable not used by the clause.
    std::set<std::string> used;
    for (const auto& v : logic::variables_of(c)) {
        used.insert(v);
    }
    std::string s = "S";
    for (int i = 0; used.count(s) != 0; ++i) {
        s = "S" + std::to_string(i);
    }
    const Term scene = Term::variable(s);
    Clause out;
    out.head = Atom{target, {scene}};
    auto lift = [&](const Atom& a) {
        Atom b{a.predicate, {scene}};
        b.args.insert(b.args.end(), a.args.begin(), a.args.end());
        return b;
    };
    if (c.body.empty()) {
        out.body.push_back(lift(c.head));
    } else {
        for (const auto& a : c.body) {
            out.body.push_back(lift(a));
        }
    }
    return out;
}

std::vector<meta::MetaRule> metarules_for(const std::vector<proposal::RuleProposal>& proposals,
                                          const std::set<std::string>& unary_fact_predicates,
                                          const std::string& target) {
    std::vector<meta::MetaRule> out;
    for (const auto& p : proposals) {
        for (const auto& c : p.clauses) {
            out.push_back(proposal::abstract_rule(scope_clause(c, unary_fact_predicates, target)));
        }
    }
    return proposal::dedupe_metarules(out);
}

namespace {

bool wants_wrappers(const std::vector<meta::MetaRule>& ms) {
    return std::any_of(ms.begin(), ms.end(), [](const meta::MetaRule& m) {
        return std::any_of(m.body().begin(), m.body().end(),
                           [](const meta::MetaAtom& a) { return a.term_vars.size() == 1; });
    });
}

void add_scoped(logic::Program& bg, const ExampleFacts& ex, bool wrappers, const std::set<std::string>& cropped) {
    const Term id = Term::constant(ex.example.id);
    std::set<Atom> seen;
    for (const auto& f : ex.facts) {
        if (cropped.count(f.predicate) != 0) {
            continue;
        }
        Atom a{f.predicate, {id}};
        a.args.insert(a.args.end(), f.args.begin(), f.args.end());
        if (seen.insert(a).second) {
            bg.add(Clause{a, {}});
        }
        if (wrappers && !f.args.empty()) {
            Atom w{wrapper_name(f), {id}};
            if (seen.insert(w).second) {
                bg.add(Clause{w, {}});
            }
        }
    }
}

} // namespace

logic::Program scoped_background(const ExampleFacts& ex, bool wrappers) {
    logic::Program bg;
    add_scoped(bg, ex, wrappers, {});
    return bg;
}

meta::Task build_task(const std::vector<ExampleFacts>& examples, const std::vector<meta::MetaRule>& metarules,
                      const std::set<std::string>& cropped, const std::string& target) {
    logic::Program bg;
    const bool wrappers = wants_wrappers(metarules);
    std::vector<Atom> pos;
    std::vector<Atom> neg;
    for (const auto& ex : examples) {
        add_scoped(bg, ex, wrappers, cropped);
        Atom e{target, {Term::constant(ex.example.id)}};
        (ex.example.label == proposal::Label::Positive ? pos : neg).push_back(std::move(e));
    }
    return meta::Task::make(std::move(bg), std::move(pos), std::move(neg), metarules, logic::PredicateId{target, 1});
}

namespace {

using Clock = std::chrono::steady_clock;

json example_json(const ExampleDescriptor& e) {
    return {{"id", e.id}, {"label", proposal::to_string(e.label)}, {"descriptor", e.descriptor}};
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string derive_run_id(const std::vector<ExampleDescriptor>& examples, const PipelineConfig& cfg) {
    std::uint64_t h = fnv1a(std::to_string(cfg.seed));
    h = fnv1a(to_string(cfg.mode), h);
    for (const auto& e : examples) {
        h = fnv1a(e.id + "\x1f" + proposal::to_string(e.label) + "\x1f" + e.descriptor + "\x1e", h);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%012llx", static_cast<unsigned long long>(h & 0xffffffffffffULL));
    return buf;
}

// Key that identifies clauses up to body-literal order.
std::string body_set_key(const meta::Hypothesis& h) {
    std::vector<std::string> clauses;
    for (const auto& c : h.clauses) {
        std::vector<std::string> lits;
        for (const auto& b : c.body) {
            lits.push_back(logic::to_string(b));
        }
        std::sort(lits.begin(), lits.end());
        std::string k = logic::to_string(c.head) + ":-";
        for (const auto& l : lits) {
            k += l + ",";
        }
        clauses.push_back(k);
    }
    std::sort(clauses.begin(), clauses.end());
    std::string out;
    for (const auto& c : clauses) {
        out += c + ";";
    }
    return out;
}

class Run {
public:
    Run(const std::vector<ExampleDescriptor>& examples, proposer::Proposer& p, const PipelineConfig& cfg)
        : examples_(examples), cfg_(cfg), recorder_(p, journal_) {
        report_.run_id = cfg.run_id.empty() ? derive_run_id(examples, cfg) : cfg.run_id;
        report_.mode = cfg.mode;
        report_.config = cfg.to_json();
    }

    RunReport execute() {
        const auto t0 = Clock::now();
        try {
            body();
        } catch (...) {
            finish(t0);
            throw;
        }
        finish(t0);
        return std::move(report_);
    }

private:
    void body() {
        const std::size_t max_iter = cfg_.reflection ? cfg_.max_reflection_iterations : 0;
        for (std::size_t resample = 0;; ++resample) {
            cropped_.clear();
            if (resample == 0) {
                propose_criteria();
            } else {
                resample_tokens(resample);
            }
            extract_all();
            propose_rules();
            if (cfg_.mode == Mode::NoIlp) {
                baseline();
                return;
            }
            if (attempt()) {
                return;
            }
            for (std::size_t i = 1; i <= max_iter; ++i) {
                if (!requery_facts(i)) {
                    break;
                }
                if (attempt()) {
                    return;
                }
            }
            for (std::size_t i = 1; i <= max_iter; ++i) {
                crop_and_regenerate(i);
                if (attempt()) {
                    return;
                }
            }
            if (resample >= max_iter) {
                break;
            }
        }
        report_.outcome = "no-rule";
        report_.status = cfg_.reflection ? "reflection-exhausted" : "reflection-disabled";
    }

    void finish(Clock::time_point t0) {
        report_.transcript = journal_.to_json();
        report_.final_facts.clear();
        for (const auto& ex : facts_) {
            auto& out = report_.final_facts[ex.example.id];
            for (const auto& f : ex.facts) {
                out.push_back(logic::to_string(f));
            }
        }
        report_.cropped.assign(cropped_.begin(), cropped_.end());
        report_.timings["total_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
        report_.timings["learn_ms"] = static_cast<std::int64_t>(learn_s_ * 1000.0);
        if (report_.outcome.empty()) {
            report_.outcome = "no-rule";
            report_.status = "aborted";
        }
    }

    proposer::ProposerResponse send(RequestKind kind, json payload) {
        ProposerRequest req{kind, report_.run_id, seq_++, std::move(payload)};
        return recorder_.send(req);
    }

    json token_names() const {
        json out = json::array();
        for (const auto& c : tokens_) {
            out.push_back(c.token.name);
        }
        return out;
    }

    json examples_json() const {
        json out = json::array();
        for (const auto& e : examples_) {
            out.push_back(example_json(e));
        }
        return out;
    }

    json facts_json() const {
        json out = json::array();
        for (const auto& ex : facts_) {
            json fs = json::array();
            for (const auto& f : ex.facts) {
                if (cropped_.count(f.predicate) == 0) {
                    fs.push_back(logic::to_string(f));
                }
            }
            out.push_back({{"id", ex.example.id}, {"label", proposal::to_string(ex.example.label)}, {"facts", fs}});
        }
        return out;
    }

    void set_tokens(const std::vector<proposal::Criterion>& cs) {
        tokens_.clear();
        for (const auto& c : cs) {
            if (logic::is_identifier(c.token.name)) {
                tokens_.push_back(c);
            } else {
                report_.notes.push_back("criterion '" + c.token.name + "' dropped: not a predicate name");
            }
        }
    }

    void propose_criteria() {
        try {
            set_tokens(send(RequestKind::ProposeCriteria, {{"target", cfg_.target}, {"examples", examples_json()}}).criteria);
        } catch (const MalformedResponse& e) {
            report_.notes.push_back(std::string("propose_criteria: ") + e.what());
            tokens_.clear();
        }
    }

    void resample_tokens(std::size_t iteration) {
        json previous = json::array();
        for (const auto& c : tokens_) {
            previous.push_back(json::parse(proposer::to_json(c).dump()));
        }
        ordered_json detail;
        try {
            set_tokens(send(RequestKind::ResampleTokens,
                            {{"target", cfg_.target}, {"previous", previous}, {"examples", examples_json()}})
                           .criteria);
        } catch (const MalformedResponse& e) {
            detail["error"] = e.what();
        }
        detail["tokens"] = token_names();
        report_.trace.push_back({3, "tokens-resampled", iteration, detail});
    }

    void extract_all() {
        facts_.clear();
        for (const auto& e : examples_) {
            ExampleFacts ef;
            ef.example = e;
            std::string raw;
            try {
                raw = send(RequestKind::ExtractFacts, {{"example", example_json(e)}, {"tokens", token_names()}}).facts_text;
                auto n = proposal::normalize_facts(raw, e.id, e.label);
                ef.facts = std::move(n.facts.facts);
                ef.compound_origin = std::move(n.facts.compound_origin);
                append(report_.quarantine, n.quarantine);
                for (auto& note : n.notes) {
                    report_.notes.push_back(e.id + ": " + note);
                }
            } catch (const EmptyFactSet&) {
                report_.quarantine.push_back({e.id, "no fact survived normalization", raw});
            } catch (const MalformedResponse& ex) {
                report_.quarantine.push_back({e.id, std::string("malformed extraction: ") + ex.what(), raw});
            }
            facts_.push_back(std::move(ef));
        }
    }

    std::set<std::string> unary_fact_predicates() const {
        std::set<std::string> out;
        for (const auto& ex : facts_) {
            for (const auto& f : ex.facts) {
                if (f.args.size() == 1) {
                    out.insert(f.predicate);
                }
            }
        }
        return out;
    }

    void take_proposals(const std::string& text, const std::string& source) {
        auto parsed = proposal::parse_rule_proposals(text, source);
        append(report_.quarantine, parsed.quarantine);
        if (!parsed.proposals.empty()) {
            proposals_ = std::move(parsed.proposals);
        }
    }

    void propose_rules() {
        proposals_.clear();
        try {
            const auto r = send(RequestKind::ProposeRuleStructures,
                                {{"target", cfg_.target}, {"tokens", token_names()}, {"facts", facts_json()}});
            take_proposals(r.rules_text, "rules#" + std::to_string(seq_ - 1));
        } catch (const MalformedResponse& e) {
            report_.notes.push_back(std::string("propose_rule_structures: ") + e.what());
        }
    }

    // Scores every candidate on every example; MalformedResponse scores 0.
    void score(const std::vector<meta::Hypothesis>& cands, std::vector<std::vector<double>>& pos,
               std::vector<std::vector<double>>& neg, std::vector<std::map<std::string, double>>& per) {
        pos.assign(cands.size(), {});
        neg.assign(cands.size(), {});
        per.assign(cands.size(), {});
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const std::string rule = cands[i].text();
            for (const auto& e : examples_) {
                double s = 0.0;
                try {
                    s = send(RequestKind::ScoreRule, {{"rule", rule}, {"example_id", e.id}, {"descriptor", e.descriptor}})
                            .score.value_or(0.0);
                } catch (const MalformedResponse& ex) {
                    report_.notes.push_back("score_rule " + e.id + ": " + ex.what());
                }
                (e.label == proposal::Label::Positive ? pos : neg)[i].push_back(s);
                per[i][e.id] = s;
            }
        }
    }

    void emit(std::vector<meta::Hypothesis> cands) {
        std::vector<std::vector<double>> pos;
        std::vector<std::vector<double>> neg;
        std::vector<std::map<std::string, double>> per;
        score(cands, pos, neg, per);
        std::vector<std::string> texts;
        for (const auto& h : cands) {
            texts.push_back(h.text());
        }
        auto i = select_index(texts, pos, neg, cfg_.alpha);
        // Among score ties, the candidate closest to what was proposed wins.
        const double top = selection_score(pos[i], neg[i], cfg_.alpha);
        std::size_t best_overlap = proposal_overlap(cands[i]);
        for (std::size_t k = 0; k < cands.size(); ++k) {
            const double s = selection_score(pos[k], neg[k], cfg_.alpha);
            if (std::abs(s - top) > 1e-12 * std::max({1.0, std::abs(s), std::abs(top)})) {
                continue;
            }
            const auto o = proposal_overlap(cands[k]);
            if (o > best_overlap || (o == best_overlap && texts[k] < texts[i])) {
                i = k;
                best_overlap = o;
            }
        }
        InducedRule r;
        r.hypothesis = cands[i];
        r.natural_text = naturalize(r.hypothesis, cfg_.target);
        r.score = selection_score(pos[i], neg[i], cfg_.alpha);
        r.per_example_scores = per[i];
        if (cfg_.expand_nl) {
            try {
                r.expansion =
                    send(RequestKind::ExpandRule, {{"rule", r.hypothesis.text()}, {"natural_text", r.natural_text}}).text;
            } catch (const MalformedResponse& e) {
                report_.notes.push_back(std::string("expand_rule: ") + e.what());
            }
        }
        report_.induced = std::move(r);
        report_.outcome = "rule";
    }

    // Distinct body predicates that also occur in some proposal body.
    std::size_t proposal_overlap(const meta::Hypothesis& h) const {
        std::set<std::string> proposed;
        for (const auto& p : proposals_) {
            for (const auto& c : p.clauses) {
                for (const auto& b : c.body) {
                    proposed.insert(b.predicate);
                }
            }
        }
        std::set<std::string> hit;
        for (const auto& c : h.clauses) {
            for (const auto& b : c.body) {
                if (proposed.count(b.predicate) != 0) {
                    hit.insert(b.predicate);
                }
            }
        }
        return hit.size();
    }

    void baseline() {
        if (proposals_.empty()) {
            report_.outcome = "no-rule";
            report_.status = "no-proposal";
            return;
        }
        meta::Hypothesis h;
        h.clauses = proposals_.front().clauses;
        emit({h});
        report_.status = "baseline";
    }

    bool attempt() {
        const auto metarules = metarules_for(proposals_, unary_fact_predicates(), cfg_.target);
        report_.metarules.clear();
        for (const auto& m : metarules) {
            report_.metarules.push_back(m.encode());
        }
        if (metarules.empty()) {
            report_.notes.push_back("no usable rule structure");
            return false;
        }
        const auto task = build_task(facts_, metarules, cropped_, cfg_.target);
        ++report_.learn_calls;
        const auto outcome = meta::learn(task, cfg_.budget);
        learn_s_ += std::visit([](const auto& o) { return o.elapsed_s; }, outcome);
        const auto* found = std::get_if<meta::Found>(&outcome);
        if (found == nullptr || found->hypotheses.empty() || found->hypotheses.front().empty()) {
            if (std::holds_alternative<meta::Timeout>(outcome)) {
                report_.notes.push_back("learn timed out");
            }
            return false;
        }
        std::vector<meta::Hypothesis> cands;
        std::set<std::string> seen;
        for (const auto& h : found->hypotheses) {
            if (seen.insert(body_set_key(h)).second) {
                cands.push_back(h);
            }
        }
        if (cands.size() > cfg_.max_candidates) {
            report_.notes.push_back("scored the first " + std::to_string(cfg_.max_candidates) + " of " +
                                    std::to_string(cands.size()) + " candidates");
            cands.resize(cfg_.max_candidates);
        }
        emit(std::move(cands));
        if (const auto bad = unverified(); !bad.empty()) {
            report_.notes.push_back("selected rule " + report_.induced->hypothesis.text() + " failed verification on " +
                                    bad);
            report_.induced.reset();
            report_.outcome.clear();
            return false;
        }
        report_.status = "found";
        return true;
    }

    // Examples on which the proposer's score disagrees with the label.
    std::string unverified() const {
        if (cfg_.verify_threshold <= 0.0 || !report_.induced) {
            return {};
        }
        std::string out;
        for (const auto& ex : facts_) {
            const auto it = report_.induced->per_example_scores.find(ex.example.id);
            const double s = it == report_.induced->per_example_scores.end() ? 0.0 : it->second;
            const bool pos = ex.example.label == proposal::Label::Positive;
            if (pos ? s < cfg_.verify_threshold : s >= cfg_.verify_threshold) {
                out += (out.empty() ? "" : ",") + ex.example.id;
            }
        }
        return out;
    }

    // Stage 1: every fact re-queried on its own; false facts are replaced.
    bool requery_facts(std::size_t iteration) {
        std::size_t queried = 0;
        std::size_t replaced = 0;
        std::size_t compounds = 0;
        bool changed = false;
        for (auto& ex : facts_) {
            compounds += ex.compound_origin.size();
            const std::set<Atom> before(ex.facts.begin(), ex.facts.end());
            std::vector<Atom> next;
            std::set<Atom> seen;
            auto keep = [&](Atom a) {
                if (seen.insert(a).second) {
                    next.push_back(std::move(a));
                }
            };
            for (const auto& f : ex.facts) {
                if (cropped_.count(f.predicate) != 0) {
                    keep(f);
                    continue;
                }
                ++queried;
                const std::string text = logic::to_string(f);
                proposer::Verdict v = proposer::Verdict::Unknown;
                std::vector<std::string> replacement;
                try {
                    const auto r = send(RequestKind::VerifyFact, {{"example_id", ex.example.id},
                                                                  {"descriptor", ex.example.descriptor},
                                                                  {"fact", text}});
                    v = r.verdict;
                    replacement = r.replacement;
                } catch (const MalformedResponse& e) {
                    report_.notes.push_back("verify_fact " + ex.example.id + " " + text + ": " + e.what());
                }
                if (v == proposer::Verdict::False) {
                    ++replaced;
                    for (const auto& r : replacement) {
                        std::string raw = r;
                        try {
                            auto n = proposal::normalize_facts(raw, ex.example.id, ex.example.label);
                            append(report_.quarantine, n.quarantine);
                            for (auto& a : n.facts.facts) {
                                keep(std::move(a));
                            }
                        } catch (const EmptyFactSet&) {
                            report_.quarantine.push_back({ex.example.id, "unusable replacement fact", raw});
                        }
                    }
                    continue;
                }
                if (v == proposer::Verdict::Unknown) {
                    const std::string tag = ex.example.id + ":" + text;
                    if (std::find(report_.low_confidence.begin(), report_.low_confidence.end(), tag) ==
                        report_.low_confidence.end()) {
                        report_.low_confidence.push_back(tag);
                    }
                }
                keep(f);
            }
            if (std::set<Atom>(next.begin(), next.end()) != before) {
                changed = true;
            }
            ex.facts = std::move(next);
            ex.compound_origin.clear();
        }
        ordered_json detail;
        detail["queried"] = queried;
        detail["replaced"] = replaced;
        detail["compound_facts"] = compounds;
        detail["changed"] = changed;
        report_.trace.push_back({1, "facts-requeried", iteration, detail});
        return changed;
    }

    // Stage 2: relevance-ranked crop, then fresh relation proposals.
    void crop_and_regenerate(std::size_t iteration) {
        std::set<std::string> preds;
        for (const auto& ex : facts_) {
            for (const auto& f : ex.facts) {
                if (cropped_.count(f.predicate) == 0) {
                    preds.insert(f.predicate);
                }
            }
        }
        const std::vector<std::string> plist(preds.begin(), preds.end());
        ordered_json detail;
        std::map<std::string, double> scores;
        try {
            scores = send(RequestKind::ScorePredicates, {{"predicates", plist}, {"examples", examples_json()}}).scores;
        } catch (const MalformedResponse& e) {
            detail["error"] = e.what();
        }
        for (const auto& p : plist) {
            scores.try_emplace(p, 0.0);
        }
        std::vector<std::string> dropped;
        std::vector<std::string> kept = plist;
        if (!plist.empty()) {
            auto crop = proposal::crop_predicates(plist, scores, cfg_.crop_fraction, cfg_.target);
            dropped = crop.dropped;
            kept = crop.kept;
        }
        cropped_.insert(dropped.begin(), dropped.end());
        std::size_t new_proposals = 0;
        try {
            const auto r = send(RequestKind::RegenerateRelations, {{"target", cfg_.target},
                                                                   {"kept", kept},
                                                                   {"dropped", dropped},
                                                                   {"facts", facts_json()}});
            take_proposals(r.rules_text, "relations#" + std::to_string(seq_ - 1));
            new_proposals = proposals_.size();
        } catch (const MalformedResponse& e) {
            detail["regenerate_error"] = e.what();
        }
        detail["dropped"] = dropped;
        detail["kept"] = kept.size();
        detail["proposals"] = new_proposals;
        report_.trace.push_back({2, "predicates-cropped", iteration, detail});
    }

    template <typename T>
    static void append(std::vector<T>& out, const std::vector<T>& in) {
        out.insert(out.end(), in.begin(), in.end());
    }

    const std::vector<ExampleDescriptor>& examples_;
    const PipelineConfig& cfg_;
    proposer::Journal journal_;
    proposer::JournalingProposer recorder_;
    RunReport report_;
    std::uint64_t seq_ = 0;
    std::vector<proposal::Criterion> tokens_;
    std::vector<ExampleFacts> facts_;
    std::vector<proposal::RuleProposal> proposals_;
    std::set<std::string> cropped_;
    double learn_s_ = 0.0;
};

} // namespace

RunReport run_task(const std::vector<ExampleDescriptor>& examples, proposer::Proposer& proposer,
                   const PipelineConfig& config) {
    config.validate();
    if (std::none_of(examples.begin(), examples.end(),
                     [](const ExampleDescriptor& e) { return e.label == proposal::Label::Positive; })) {
        throw std::invalid_argument("run_task needs at least one positive example");
    }
    std::set<std::string> ids;
    for (const auto& e : examples) {
        if (!logic::is_identifier(e.id)) {
            throw std::invalid_argument("example id '" + e.id + "' is not a constant name");
        }
        if (!ids.insert(e.id).second) {
            throw std::invalid_argument("duplicate example id '" + e.id + "'");
        }
    }
    Run run(examples, proposer, config);
    return run.execute();
}

Classification classify(const ExampleDescriptor& example, const std::map<std::string, InducedRule>& class_rules,
                        proposer::Proposer& proposer, const std::string& run_id, const std::vector<std::string>& tokens,
                        const std::string& target) {
    if (class_rules.size() < 2) {
        throw std::invalid_argument("classify needs at least two classes");
    }
    std::uint64_t seq = 0;
    Classification out;
    std::optional<ExampleFacts> facts;
    try {
        const auto r = proposer.send({RequestKind::ExtractFacts, run_id, seq++,
                                      {{"example", example_json(example)}, {"tokens", tokens}}});
        auto n = proposal::normalize_facts(r.facts_text, example.id, example.label);
        facts = ExampleFacts{example, std::move(n.facts.facts), {}};
    } catch (const EmptyFactSet&) {
    } catch (const MalformedResponse&) {
    }
    std::vector<std::string> satisfied;
    if (facts) {
        const Atom goal{target, {Term::constant(example.id)}};
        for (const auto& [label, rule] : class_rules) {
            auto bg = scoped_background(*facts, true);
            for (const auto& c : rule.hypothesis.clauses) {
                bg.add(c);
            }
            const bool ok = logic::prove(bg, std::span<const Atom>(&goal, 1)).status == logic::ProofStatus::Provable;
            out.scores[label] = ok ? 1.0 : 0.0;
            if (ok) {
                satisfied.push_back(label);
            }
        }
        if (!satisfied.empty()) {
            out.method = "entailment";
            out.label = satisfied.front();
            out.tie = satisfied.size() > 1;
            return out;
        }
    }
    out.method = "scorer";
    out.scores.clear();
    double best = -1.0;
    for (const auto& [label, rule] : class_rules) {
        double s = 0.0;
        try {
            s = proposer
                    .send({RequestKind::ScoreRule, run_id, seq++,
                           {{"rule", rule.hypothesis.text()}, {"example_id", example.id}, {"descriptor", example.descriptor}}})
                    .score.value_or(0.0);
        } catch (const MalformedResponse&) {
        }
        out.scores[label] = s;
        if (s > best) {
            best = s;
            out.label = label;
        }
    }
    out.tie = std::count_if(out.scores.begin(), out.scores.end(), [&](const auto& kv) { return kv.second == best; }) > 1;
    return out;
}

} // namespace abductor::pipeline
