// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include <unistd.h>

#include "support/fake_chat.hpp"
#include "support/generators.hpp"
#include "support/ground_oracle.hpp"

#include "abductor/bench/grid.hpp"
#include "abductor/bench/inject.hpp"
#include "abductor/bench/scene.hpp"
#include "abductor/bench/simulated.hpp"
#include "abductor/bench/suites.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/meta/metarule.hpp"
#include "abductor/pipeline/pipeline.hpp"
#include "abductor/proposal/abstraction.hpp"
#include "abductor/proposer/live.hpp"

using namespace abductor;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr double kC1MaxSeconds = 60.0;
constexpr int kC1Tasks = 100;
constexpr int kC2Renamings = 1000;
constexpr double kC4MinWrongRate = 0.995; // prints as 1.00
constexpr double kC4MinGap = 0.30;
constexpr double kC4MaxSeconds = 300.0;
constexpr double kC5TypicalSeconds = 10.0;
constexpr std::chrono::milliseconds kC5TightBudget{2000};
constexpr double kC5OverrunSlack = 1.0;
constexpr std::size_t kC6Groups = 60;
constexpr int kC7Runs = 10;
constexpr int kC8Pairs = 1000;
constexpr int kC8Corruptions = 1000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1. learner vs brute-force oracle --------------------------------------

const char* kMetarules[] = {
    "[[P,Q],[P,A],[[Q,A]]]",
    "[[P,Q,R],[P,A],[[Q,A],[R,A]]]",
    "[[P,Q],[P,A],[[Q,A,B]]]",
    "[[P,Q,R],[P,A],[[Q,A,B],[R,B]]]",
    "[[P,Q],[P,A,B],[[Q,A,B]]]",
    "[[P,Q],[P,A,B],[[Q,B,A]]]",
    "[[P,Q,R],[P,A,B],[[Q,A,C],[R,C,B]]]",
    "[[P,Q,R],[P,A,B],[[Q,A],[R,B]]]",
    "[[P,Q],[P,A,B],[[Q,A,C],[P,C,B]]]",
};

// At most 6 constants, 7 background predicates plus the target, 3 meta-rules.
meta::Task guarded_task(testsupport::Gen& g) {
    const std::size_t nconst = 3 + g.below(4);
    auto c = [&]() { return "c" + std::to_string(g.below(nconst)); };
    std::string bk;
    const std::size_t nunary = 1 + g.below(4);
    const std::size_t nbinary = g.below(4);
    for (std::size_t p = 0; p < nunary; ++p) {
        for (std::size_t k = 0; k < 1 + g.below(4); ++k) {
            bk += "u" + std::to_string(p) + "(" + c() + ").\n";
        }
    }
    for (std::size_t p = 0; p < nbinary; ++p) {
        for (std::size_t k = 0; k < 1 + g.below(5); ++k) {
            bk += "b" + std::to_string(p) + "(" + c() + "," + c() + ").\n";
        }
    }
    const bool binary_target = nbinary > 0 && g.coin();
    std::vector<logic::Atom> pool;
    for (std::size_t i = 0; i < nconst; ++i) {
        for (std::size_t j = 0; j < (binary_target ? nconst : 1); ++j) {
            pool.push_back(logic::parse_atom(binary_target ? "t(c" + std::to_string(i) + ",c" + std::to_string(j) + ")"
                                                           : "t(c" + std::to_string(i) + ")"));
        }
    }
    std::shuffle(pool.begin(), pool.end(), g.rng());
    const std::size_t npos = 1 + g.below(3);
    const std::size_t nneg = g.below(4);
    std::vector<logic::Atom> pos(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(npos));
    std::vector<logic::Atom> neg(pool.begin() + static_cast<std::ptrdiff_t>(npos),
                                 pool.begin() + static_cast<std::ptrdiff_t>(std::min(pool.size(), npos + nneg)));
    std::vector<meta::MetaRule> ms;
    std::vector<std::size_t> idx(std::size(kMetarules));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), g.rng());
    for (std::size_t k = 0; k < 1 + g.below(3); ++k) {
        ms.push_back(meta::parse_metarule(kMetarules[idx[k]]));
    }
    return meta::Task::make(logic::parse_program(bk), pos, neg, ms, {"t", binary_target ? 2U : 1U});
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    testsupport::Gen g(101);
    int agree = 0;
    int solvable = 0;
    std::string first_bad;
    for (int i = 0; i < kC1Tasks; ++i) {
        const auto task = guarded_task(g);
        const auto oracle = meta::enumerate_bruteforce(task, 2);
        meta::SearchBudget b;
        b.max_clauses = 2;
        b.wall_time = std::chrono::milliseconds(60000);
        const auto out = meta::learn(task, b);
        bool ok = false;
        if (oracle.empty()) {
            ok = std::holds_alternative<meta::NoHypothesis>(out);
        } else if (const auto* f = std::get_if<meta::Found>(&out)) {
            ++solvable;
            std::size_t min_size = oracle.front().size();
            for (const auto& h : oracle) {
                min_size = std::min(min_size, h.size());
            }
            ok = !f->hypotheses.empty();
            for (const auto& h : f->hypotheses) {
                ok = ok && h.size() == min_size &&
                     testsupport::fc_consistent(task.background(), h.clauses, task.positives(), task.negatives());
            }
        }
        agree += ok ? 1 : 0;
        if (!ok && first_bad.empty()) {
            first_bad = " first mismatch: task " + std::to_string(i);
        }
    }
    const double s = seconds_since(t0);
    return {agree == kC1Tasks && s < kC1MaxSeconds,
            std::to_string(agree) + "/" + std::to_string(kC1Tasks) + " agree (" + std::to_string(solvable) +
                " solvable), " + fmt("%.1f s", s) + first_bad};
}

// ---- 2. abstraction ----------------------------------------------------------

logic::Clause random_clause(testsupport::Gen& g) {
    static const char* preds[] = {"p", "q", "r", "s", "t"};
    static const char* vars[] = {"X", "Y", "Z", "W"};
    static const char* consts[] = {"a", "b", "c"};
    auto term = [&]() {
        return g.coin(0.75) ? logic::Term::variable(vars[g.below(4)]) : logic::Term::constant(consts[g.below(3)]);
    };
    logic::Clause c;
    c.head.predicate = "h";
    const std::size_t head_arity = 1 + g.below(2);
    for (std::size_t i = 0; i < head_arity; ++i) {
        c.head.args.push_back(logic::Term::variable(vars[i]));
    }
    const std::size_t n = 1 + g.below(3);
    for (std::size_t i = 0; i < n; ++i) {
        logic::Atom a{preds[g.below(5)], {}};
        const std::size_t arity = 1 + g.below(2);
        for (std::size_t k = 0; k < arity; ++k) {
            a.args.push_back(term());
        }
        c.body.push_back(std::move(a));
    }
    return c;
}

logic::Clause rename(const logic::Clause& c, testsupport::Gen& g) {
    std::map<std::string, std::string> preds;
    std::map<std::string, std::string> consts;
    std::set<std::string> used;
    auto fresh = [&](const std::string& stem) {
        for (;;) {
            auto n = stem + std::to_string(g.below(1000000));
            if (used.insert(n).second) {
                return n;
            }
        }
    };
    auto pred = [&](const std::string& p) {
        auto it = preds.find(p);
        return it != preds.end() ? it->second : (preds[p] = fresh("k"));
    };
    auto atom = [&](const logic::Atom& a) {
        logic::Atom out{pred(a.predicate), {}};
        for (const auto& t : a.args) {
            if (t.kind == logic::Term::Kind::Constant) {
                auto it = consts.find(t.name);
                out.args.push_back(logic::Term::constant(it != consts.end() ? it->second : (consts[t.name] = fresh("o"))));
            } else {
                out.args.push_back(t);
            }
        }
        return out;
    };
    logic::Clause r;
    r.head = atom(c.head);
    for (const auto& b : c.body) {
        r.body.push_back(atom(b));
    }
    return r;
}

Outcome criterion2() {
    const auto m = proposal::abstract_rule(logic::parse_clause("liked(X,Y) :- golden(X), cat(Y)."));
    const bool exact = m.encode() == "[[P,Q,R],[P,A,B],[[Q,A],[R,B]]]";
    testsupport::Gen g(202);
    int same = 0;
    int errors = 0;
    for (int i = 0; i < kC2Renamings; ++i) {
        const auto c = random_clause(g);
        try {
            const auto a = proposal::abstract_rule(c);
            const auto b = proposal::abstract_rule(rename(c, g));
            same += a.name() == b.name() && a.encode() == b.encode() ? 1 : 0;
        } catch (const std::exception&) {
            ++errors;
        }
    }
    return {exact && same == kC2Renamings && errors == 0,
            "golden/cat -> " + m.encode() + ", " + std::to_string(same) + "/" + std::to_string(kC2Renamings) +
                " renamings digest-identical, " + std::to_string(errors) + " exceptions"};
}

// ---- 3. scored selection ----------------------------------------------------------

// Independent recomputation: plain sums, ties to the smallest text.
std::size_t oracle_argmax(const std::vector<std::string>& texts, const std::vector<std::vector<double>>& pos,
                          const std::vector<std::vector<double>>& neg, double alpha) {
    std::size_t best = 0;
    double best_v = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        double sp = 0;
        double sn = 0;
        for (const double v : pos[i]) {
            sp += v;
        }
        for (const double v : neg[i]) {
            sn += v;
        }
        const double v = alpha * sp / static_cast<double>(pos[i].size()) - (1 - alpha) * sn / static_cast<double>(neg[i].size());
        if (i == 0 || v > best_v + 1e-12 || (std::abs(v - best_v) <= 1e-12 && texts[i] < texts[best])) {
            best = i;
            best_v = v;
        }
    }
    return best;
}

Outcome criterion3() {
    std::vector<meta::Hypothesis> cands;
    std::vector<std::string> texts;
    for (const char* c : {"target(A) :- red(A).", "target(A) :- cube(A).", "target(A) :- red(A), cube(A).",
                          "target(A) :- large(A).", "target(A) :- metal(A), red(A)."}) {
        meta::Hypothesis h;
        h.clauses.push_back(logic::parse_clause(c));
        texts.push_back(h.text());
        cands.push_back(std::move(h));
    }
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0, 1);
    int checks = 0;
    int ok = 0;
    // the pinned fixture is trial 0; 199 further seeded score tables follow
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> pos(5, std::vector<double>(3));
        std::vector<std::vector<double>> neg(5, std::vector<double>(3));
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t e = 0; e < 3; ++e) {
                pos[i][e] = std::round(u(rng) * 20) / 20;
                neg[i][e] = std::round(u(rng) * 20) / 20;
            }
        }
        for (const double alpha : {0.70, 0.75, 0.80}) {
            const auto want = oracle_argmax(texts, pos, neg, alpha);
            const auto got = pipeline::select_rule(cands, pos, neg, alpha);
            ++checks;
            ok += got.hypothesis.text() == texts[want] ? 1 : 0;
            for (const double c : {0.1, 2.0, 10.0}) {
                auto sp = pos;
                auto sn = neg;
                for (auto* table : {&sp, &sn}) {
                    for (auto& row : *table) {
                        for (auto& v : row) {
                            v *= c;
                        }
                    }
                }
                ++checks;
                ok += pipeline::select_rule(cands, sp, sn, alpha).hypothesis.text() == got.hypothesis.text() ? 1 : 0;
            }
        }
    }
    return {ok == checks, std::to_string(ok) + "/" + std::to_string(checks) + " selections agree (5 candidates x 6 examples)"};
}

// ---- 4. hallucination rectification -------------------------------------------

Outcome criterion4() {
    const auto t0 = Clock::now();
    bench::ClevrSynthConfig cfg;
    cfg.tasks = 50;
    cfg.n_pos = 4;
    cfg.n_neg = 8;
    cfg.fact_rates = bench::kFacts3Rates;
    cfg.rule_rates = bench::kRules1Rates;
    cfg.seed = 7;
    const auto ilp = bench::run_clevr_synth(cfg);
    cfg.mode = pipeline::Mode::NoIlp;
    const auto base = bench::run_clevr_synth(cfg);
    const double s = seconds_since(t0);
    const auto wrong = ilp.rectification_total().wrong;
    const double gap = ilp.accuracy() - base.accuracy();
    return {wrong.rate() >= kC4MinWrongRate && gap >= kC4MinGap && s < kC4MaxSeconds,
            "wrong-fact rectification " + fmt("%.2f", wrong.rate()) + " over " + std::to_string(wrong.events) +
                " events; recovery ilp " + fmt("%.2f", ilp.accuracy()) + " vs no-ilp " + fmt("%.2f", base.accuracy()) +
                " (gap " + fmt("%.0f", gap * 100) + " pp); " + fmt("%.0f s", s)};
}

// ---- 5. timeout discipline ------------------------------------------------------

// Ten scenes, twelve attribute predicates (the rule's plus others), three meta-rules.
meta::Task typical_task(std::uint64_t seed, bool overload) {
    const auto rule = bench::random_rule(4, seed, "r");
    const auto scenes = bench::gen_scenes(rule, 5, 5, seed + 100);
    std::set<std::string> keep;
    for (const auto& l : rule.clause.body) {
        keep.insert(l.predicate);
    }
    for (const auto& p : bench::attribute_predicates()) {
        if (keep.size() < 12) {
            keep.insert(p);
        }
    }
    std::vector<pipeline::ExampleFacts> exs;
    for (std::size_t k = 0; k < scenes.size(); ++k) {
        pipeline::ExampleFacts ef;
        ef.example = {scenes[k].id, scenes[k].label, ""};
        if (overload) {
            // labels unrelated to the scenes: nothing fits, so the search has to be exhaustive
            ef.example.label = k % 2 == 0 ? proposal::Label::Positive : proposal::Label::Negative;
        }
        for (const auto& f : bench::scene_to_facts(scenes[k]).facts) {
            if (keep.count(f.predicate) != 0) {
                ef.facts.push_back(f);
            }
        }
        exs.push_back(std::move(ef));
    }
    std::vector<meta::MetaRule> ms = {
        meta::parse_metarule("[[P,Q,R,S,T],[P,A],[[Q,A,B],[R,A,B],[S,A,C],[T,A,C]]]"),
        meta::parse_metarule("[[P,Q,R,S],[P,A],[[Q,A,B],[R,A,B],[S,A,C]]]"),
        meta::parse_metarule("[[P,Q,R],[P,A],[[Q,A,B],[R,A,C]]]"),
    };
    if (overload) {
        ms[0] = meta::parse_metarule("[[P,Q,R,S,T,U,V],[P,A],[[Q,A,B],[R,A,B],[S,A,C],[T,A,C],[U,A,D],[V,A,D]]]");
    }
    return pipeline::build_task(exs, ms, {}, "target");
}

Outcome criterion5() {
    double worst = 0;
    int completed = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto out = meta::learn(typical_task(seed, false), meta::SearchBudget{});
        const double s = std::visit([](const auto& o) { return o.elapsed_s; }, out);
        worst = std::max(worst, s);
        completed += std::holds_alternative<meta::Timeout>(out) ? 0 : 1;
    }
    meta::SearchBudget tight;
    tight.wall_time = kC5TightBudget;
    const auto t0 = Clock::now();
    const auto over = meta::learn(typical_task(0, true), tight);
    const double s = seconds_since(t0);
    const bool timed_out = std::holds_alternative<meta::Timeout>(over);
    const double limit = std::chrono::duration<double>(kC5TightBudget).count() + kC5OverrunSlack;
    meta::SearchBudget huge;
    huge.wall_time = std::chrono::hours(1);
    const bool capped = huge.validated().wall_time == meta::SearchBudget::kHardCap;
    return {completed == 5 && worst < kC5TypicalSeconds && timed_out && s < limit && capped,
            std::to_string(completed) + "/5 typical tasks finished, slowest " + fmt("%.2f s", worst) +
                "; overloaded task " + (timed_out ? "timed out" : "did not time out") + " after " + fmt("%.2f s", s) +
                " on a " + fmt("%.0f s", limit - kC5OverrunSlack) + " budget; hard cap " +
                (capped ? "clamps" : "does not clamp")};
}

// ---- 6. sample-then-vote -----------------------------------------------------------

Outcome criterion6() {
    bench::VoteSuiteConfig cfg;
    cfg.per_class = 300;
    cfg.vote.group_size = 5;
    cfg.seed = 3;
    const auto r = bench::run_vote_suite(cfg);
    bool groups_ok = r.results.size() == 3;
    std::string detail;
    for (const auto& [cls, v] : r.results) {
        groups_ok = groups_ok && v.groups == kC6Groups;
        detail += cls + " " + std::to_string(v.groups) + " groups, " + std::to_string(v.votes) + " votes; ";
    }
    return {groups_ok && r.all_match(), detail + (r.all_match() ? "modal rules match" : "modal rule mismatch")};
}

// ---- 7. record / replay -------------------------------------------------------------

Outcome criterion7() {
    const auto dir = std::filesystem::temp_directory_path() / ("abductor_accept_" + std::to_string(::getpid()));
    testsupport::write_passthrough_prompts(dir);
    const auto prompts = proposer::load_prompts(dir.string());
    int identical = 0;
    std::size_t exchanges = 0;
    std::size_t reflected = 0;
    std::string first_bad;
    for (int i = 0; i < kC7Runs; ++i) {
        const auto rule = bench::random_rule(3 + i % 3, 700 + i, "r");
        const auto scenes = bench::gen_scenes(rule, 4, 8, 800 + i, "s");
        bench::SimulatedProposer sim(scenes, rule, {bench::kFacts3Rates, bench::kRules1Rates, 900U + i});
        std::vector<pipeline::ExampleDescriptor> examples;
        for (const auto& s : scenes) {
            examples.push_back({s.id, s.label, bench::describe(s)});
        }
        pipeline::PipelineConfig pc;
        pc.seed = static_cast<std::uint64_t>(i);
        pc.budget.max_clauses = 1;
        pipeline::RunReport live_report;
        {
            testsupport::FakeChatServer server(sim, "live");
            proposer::EndpointConfig ec;
            ec.base_url = server.base_url();
            ec.token_env = "ABDUCTOR_ACCEPTANCE_NO_TOKEN";
            ec.max_retries = 0;
            proposer::LiveProposer live(ec, prompts, proposer::http_transport(ec.base_url));
            live_report = pipeline::run_task(examples, live, pc);
        }
        std::vector<proposer::Exchange> ex;
        for (const auto& e : live_report.transcript) {
            ex.push_back(proposer::exchange_from_json(e));
        }
        exchanges += ex.size();
        reflected += live_report.trace.empty() ? 0 : 1;
        proposer::ScriptedProposer replay(proposer::Fixture::from_transcript(ex));
        const auto replayed = pipeline::run_task(examples, replay, pc);
        const bool same = pipeline::strip_volatile(pipeline::to_json(live_report)).dump() ==
                          pipeline::strip_volatile(pipeline::to_json(replayed)).dump();
        identical += same ? 1 : 0;
        if (!same && first_bad.empty()) {
            first_bad = "; first difference in run " + std::to_string(i);
        }
    }
    std::filesystem::remove_all(dir);
    return {identical == kC7Runs,
            std::to_string(identical) + "/" + std::to_string(kC7Runs) + " replays field-identical (" +
                std::to_string(exchanges) + " exchanges over http, " + std::to_string(reflected) +
                " runs with reflection)" + first_bad};
}

// ---- 8. metrics ------------------------------------------------------------------------

std::size_t loop_hamming(const bench::Grid& a, const bench::Grid& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.cells().size(); ++i) {
        d += a.cells()[i] != b.cells()[i] ? 1 : 0;
    }
    return d;
}

Outcome criterion8() {
    std::mt19937_64 rng(808);
    auto grid = [&](std::size_t r, std::size_t c) {
        std::vector<int> cells(r * c);
        for (auto& v : cells) {
            // few colours so that equal and near-equal grids occur
            v = static_cast<int>(rng() % 3);
        }
        return bench::Grid::make(r, c, cells);
    };
    int metric_ok = 0;
    for (int i = 0; i < kC8Pairs; ++i) {
        const std::size_t r = 1 + rng() % 3;
        const std::size_t c = 1 + rng() % 3;
        const auto a = grid(r, c);
        const auto b = grid(r, c);
        const auto x = grid(r, c);
        const auto d = bench::hamming(a, b);
        const bool ok = d == loop_hamming(a, b) && bench::hamming(a, a) == 0 && (d == 0) == (a == b) &&
                        d == bench::hamming(b, a) && bench::hamming(a, x) <= d + bench::hamming(b, x);
        metric_ok += ok ? 1 : 0;
    }
    int inverted = 0;
    for (int i = 0; i < kC8Corruptions; ++i) {
        const auto fs = bench::scene_to_facts(bench::random_scene("s", 1 + rng() % 5, rng));
        const auto inj = bench::inject_hallucinations(fs, {bench::kFacts3Rates, static_cast<std::uint64_t>(i)});
        const auto back = bench::invert(inj.facts, inj.log).facts;
        inverted += std::set<logic::Atom>(back.begin(), back.end()) == std::set<logic::Atom>(fs.facts.begin(), fs.facts.end())
                        ? 1
                        : 0;
    }
    return {metric_ok == kC8Pairs && inverted == kC8Corruptions,
            std::to_string(metric_ok) + "/" + std::to_string(kC8Pairs) + " grid pairs satisfy the metric axioms, " +
                std::to_string(inverted) + "/" + std::to_string(kC8Corruptions) + " corruptions invert"};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 learner-oracle equivalence", criterion1}, {"2 abstraction fidelity", criterion2},
        {"3 rule selection", criterion3},             {"4 hallucination rectification", criterion4},
        {"5 timeout discipline", criterion5},         {"6 sample-then-vote", criterion6},
        {"7 determinism and replay", criterion7},     {"8 metric suite", criterion8},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %s: %s (%s)\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
