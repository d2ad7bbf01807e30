#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <random>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/pipeline/pipeline.hpp"
#include "abductor/proposer/proposer.hpp"

using namespace abductor;
using namespace abductor::pipeline;
using proposer::Fixture;
using proposer::ScriptedProposer;
using json = nlohmann::json;

namespace {

const std::string kFixtures = ABDUCTOR_FIXTURE_DIR;

struct Loaded {
    TaskSpec spec;
    Fixture fixture;
};

Loaded load(const std::string& name) {
    return {load_task_spec(kFixtures + "/" + name + "/task.json"),
            Fixture::load(kFixtures + "/" + name + "/fixture.json")};
}

PipelineConfig config_for(const TaskSpec& spec) {
    PipelineConfig cfg;
    cfg.target = spec.target;
    cfg.budget.wall_time = std::chrono::milliseconds(20000);
    return cfg;
}

RunReport run_fixture(const std::string& name, PipelineConfig* override_cfg = nullptr) {
    auto l = load(name);
    ScriptedProposer p(l.fixture);
    PipelineConfig cfg = override_cfg != nullptr ? *override_cfg : config_for(l.spec);
    return run_task(l.spec.examples, p, cfg);
}

// Task rebuilt from what the report says the final facts and meta-rules were.
meta::Task final_task(const RunReport& r, const TaskSpec& spec) {
    std::vector<ExampleFacts> exs;
    for (const auto& e : spec.examples) {
        ExampleFacts ef;
        ef.example = e;
        if (auto it = r.final_facts.find(e.id); it != r.final_facts.end()) {
            for (const auto& f : it->second) {
                ef.facts.push_back(logic::parse_atom(f));
            }
        }
        exs.push_back(std::move(ef));
    }
    std::vector<meta::MetaRule> ms;
    for (const auto& m : r.metarules) {
        ms.push_back(meta::parse_metarule(m));
    }
    return build_task(exs, ms, std::set<std::string>(r.cropped.begin(), r.cropped.end()), spec.target);
}

bool task_predicates_exclude(const meta::Task& t, const std::string& name) {
    for (const auto& c : t.background().clauses()) {
        if (c.head.predicate == name) {
            return false;
        }
    }
    return true;
}

meta::Hypothesis hyp(std::initializer_list<const char*> clauses) {
    meta::Hypothesis h;
    for (const auto* c : clauses) {
        h.clauses.push_back(logic::parse_clause(c));
    }
    return h;
}

std::vector<int> stages(const RunReport& r) {
    std::vector<int> out;
    for (const auto& e : r.trace) {
        out.push_back(e.stage);
    }
    return out;
}

} // namespace

TEST_CASE("selection_score arithmetic and selection") {
    CHECK(selection_score({0.9}, {0.5}, 0.8) == doctest::Approx(0.62));
    CHECK(selection_score({0.7}, {0.1}, 0.8) == doctest::Approx(0.54));
    CHECK(select_index({"H1", "H2"}, {{0.9}, {0.7}}, {{0.5}, {0.1}}, 0.8) == 0);
    // empty E-: second term vanishes
    CHECK(selection_score({0.4, 0.6}, {}, 0.75) == doctest::Approx(0.375));
    CHECK(select_index({"only"}, {{0.0}}, {{1.0}}, 0.75) == 0);
    // exact tie goes to the smaller text
    CHECK(select_index({"b(X)", "a(X)"}, {{0.5}, {0.5}}, {{0.2}, {0.2}}, 0.75) == 1);
    CHECK_THROWS_AS(select_index({}, {}, {}, 0.75), std::invalid_argument);
    CHECK_THROWS_AS(select_index({"a", "b"}, {{0.5}, {0.5, 0.1}}, {{}, {}}, 0.75), std::invalid_argument);
    CHECK_THROWS_AS(select_index({"a"}, {{0.5}}, {}, 0.75), std::invalid_argument);
}

TEST_CASE("selection_score argmax is invariant under positive scaling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> cdist(0.01, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const std::size_t np = 1 + rng() % 5;
        const std::size_t nn = rng() % 5;
        const double alpha = 0.05 + 0.9 * u(rng);
        std::vector<std::string> texts;
        std::vector<std::vector<double>> pos(n);
        std::vector<std::vector<double>> neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            texts.push_back("h" + std::to_string(rng() % 1000));
            for (std::size_t k = 0; k < np; ++k) {
                pos[i].push_back(u(rng));
            }
            for (std::size_t k = 0; k < nn; ++k) {
                neg[i].push_back(u(rng));
            }
        }
        // Oracle: explicit scan, strict improvement or smaller text on equality.
        auto oracle = [&](const std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& q) {
            std::size_t best = 0;
            auto value = [&](std::size_t i) {
                double sp = 0;
                double sn = 0;
                for (double x : p[i]) {
                    sp += x;
                }
                for (double x : q[i]) {
                    sn += x;
                }
                return alpha * sp / static_cast<double>(np) - (nn == 0 ? 0.0 : (1 - alpha) * sn / static_cast<double>(nn));
            };
            for (std::size_t i = 1; i < n; ++i) {
                if (value(i) > value(best) || (value(i) == value(best) && texts[i] < texts[best])) {
                    best = i;
                }
            }
            return best;
        };
        const double c = cdist(rng);
        auto sp = pos;
        auto sn = neg;
        for (auto& v : sp) {
            for (auto& x : v) {
                x *= c;
            }
        }
        for (auto& v : sn) {
            for (auto& x : v) {
                x *= c;
            }
        }
        const auto base = select_index(texts, pos, neg, alpha);
        CHECK(base == oracle(pos, neg));
        CHECK(select_index(texts, sp, sn, alpha) == base);
    }
}

TEST_CASE("select_rule fills the induced rule") {
    const auto h1 = hyp({"target(A) :- golden(A), plays(A)."});
    const auto h2 = hyp({"target(A) :- plays(A)."});
    const auto r = select_rule({h1, h2}, {{0.9, 0.9}, {0.7, 0.7}}, {{0.5}, {0.1}}, 0.8);
    CHECK(r.hypothesis.text() == h1.text());
    CHECK(r.score == doctest::Approx(0.62));
    CHECK(r.natural_text == "target holds when: golden holds and plays holds");
}

TEST_CASE("naturalize templates") {
    CHECK(naturalize(hyp({"target(S) :- golden(S), plays(S)."})) == "target holds when: golden holds and plays holds");
    CHECK(naturalize(hyp({"target(S)."})) == "target always holds");
    CHECK(naturalize(hyp({"target(A) :- fur_golden(A,B), play_together(A,B,C)."})) ==
          "target holds when: B has fur_golden and play_together holds between B and C");
    CHECK(naturalize(hyp({"target(A) :- near(B, C)."})) == "target holds when: near holds between B and C");
    CHECK(naturalize(hyp({"target(A) :- red(B)."})) == "target holds when: B has red");
    CHECK(naturalize(hyp({"liked(A) :- golden(A).", "liked(A) :- plays(A)."}), "liked") ==
          "liked holds when: golden holds or plays holds");

    // Rendering is a function of the clause list: one "or" per extra clause.
    std::mt19937 rng(3);
    const std::vector<std::string> preds = {"a", "b", "c", "d"};
    for (int t = 0; t < 50; ++t) {
        meta::Hypothesis h;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            h.clauses.push_back(logic::parse_clause("target(A) :- " + preds[rng() % 4] + "(A)."));
        }
        const auto text = naturalize(h);
        CHECK(text == naturalize(h));
        std::size_t ors = 0;
        for (std::size_t p = text.find(" or "); p != std::string::npos; p = text.find(" or ", p + 1)) {
            ++ors;
        }
        CHECK(ors == h.clauses.size() - 1);
    }
}

TEST_CASE("scope_clause encodings") {
    using logic::parse_clause;
    using logic::to_string;
    const std::set<std::string> unary = {"fur_golden", "size_small"};
    CHECK(to_string(scope_clause(parse_clause("liked(X) :- fur_golden_dog(X), play_together(X)."), unary)) ==
          "target(X) :- fur_golden_dog(X), play_together(X).");
    CHECK(to_string(scope_clause(parse_clause("target(X) :- blue(dog), plays_with(dog, cat)."), unary)) ==
          "target(S) :- blue(S,dog), plays_with(S,dog,cat).");
    CHECK(to_string(scope_clause(parse_clause("liked(X, Y) :- golden(X), cat(Y)."), unary)) ==
          "target(S) :- golden(S,X), cat(S,Y).");
    CHECK(to_string(scope_clause(parse_clause("golden(dog)."), unary)) == "target(S) :- golden(S,dog).");
    // a unary fact predicate applied to the head variable is object-level
    CHECK(to_string(scope_clause(parse_clause("target(X) :- fur_golden(X)."), unary)) ==
          "target(S) :- fur_golden(S,X).");
    CHECK(to_string(scope_clause(parse_clause("target(X) :- near(X, Y), red(X, Y)."), unary)) ==
          "target(X) :- near(X,Y), red(X,Y).");
    CHECK(to_string(scope_clause(parse_clause("t(X) :- p(S, X)."), unary)) == "target(S0) :- p(S0,S,X).");

    const auto ms = metarules_for({proposal::RuleProposal{{parse_clause("liked(X, Y) :- golden(X), cat(Y)."),
                                                            parse_clause("l(A, B) :- g(A), c(B).")},
                                                           ""}},
                                  unary);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].encode() == "[[P,Q,R],[P,A],[[Q,A,B],[R,A,C]]]");
}

TEST_CASE("build_task scopes facts and adds wrappers only when needed") {
    ExampleFacts a{{"ex1", proposal::Label::Positive, ""}, {logic::parse_atom("fur_golden(dog)")}, {}};
    ExampleFacts b{{"ex2", proposal::Label::Negative, ""}, {logic::parse_atom("fur_black(dog)")}, {}};
    const auto unary_rule = meta::parse_metarule("[[P,Q],[P,A],[[Q,A]]]");
    const auto binary_rule = meta::parse_metarule("[[P,Q],[P,A],[[Q,A,B]]]");
    const auto t1 = build_task({a, b}, {binary_rule});
    CHECK(logic::to_string(t1.background()) == "fur_golden(ex1,dog).\nfur_black(ex2,dog).\n");
    CHECK(t1.positives().size() == 1);
    CHECK(logic::to_string(t1.negatives()[0]) == "target(ex2)");
    const auto t2 = build_task({a, b}, {unary_rule});
    CHECK(t2.background().size() == 4);
    CHECK(logic::to_string(t2.background().clauses()[1]) == "fur_golden_dog(ex1).");
    const auto t3 = build_task({a, b}, {unary_rule}, {"fur_golden"});
    CHECK(t3.background().size() == 2);
    CHECK(wrapper_name(logic::parse_atom("near(o1, f(x))")) == "near_o1_f_x_");
    CHECK_THROWS_AS(build_task({b}, {unary_rule}), InvalidTask);
}

TEST_CASE("golden dog fixture yields the playing-together rule") {
    auto l = load("golden_dog");
    ScriptedProposer p(l.fixture);
    auto cfg = config_for(l.spec);
    cfg.expand_nl = true;
    const auto r = run_task(l.spec.examples, p, cfg);
    CHECK(r.outcome == "rule");
    CHECK(r.status == "found");
    REQUIRE(r.induced);
    CHECK(r.induced->hypothesis.text() == "target(A) :- fur_golden_dog(A), play_together_dog_cat(A).");
    CHECK(r.induced->natural_text == "target holds when: fur_golden_dog holds and play_together_dog_cat holds");
    CHECK(r.induced->expansion == "a golden dog and a cat are playing together");
    CHECK(r.induced->per_example_scores.size() == 5);
    CHECK(r.induced->score == doctest::Approx(0.75 * 0.9 - 0.25 * 0.1));
    CHECK(r.trace.empty());
    CHECK(r.learn_calls == 1);
    CHECK(r.metarules == std::vector<std::string>{"[[P,Q,R],[P,A],[[Q,A],[R,A]]]"});
    CHECK(meta::is_consistent(r.induced->hypothesis, final_task(r, l.spec)).consistent);

    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.push_back(k);
    }
    CHECK(keys.front() == "run_id");
    CHECK(j["induced"]["rule"] == r.induced->hypothesis.text());
    CHECK(j["transcript"].size() == r.transcript.size());
    CHECK_FALSE(strip_volatile(j).contains("timings"));
}

TEST_CASE("a rule the scorer accepts on a negative fails verification") {
    auto l = load("golden_dog");
    auto fj = l.fixture.to_json();
    fj["responses"]["score_rule"] = {{"default", {{"score", 0.9}}}};
    const auto crop = load("crop").fixture.to_json();
    fj["responses"]["score_predicates"] = crop["responses"]["score_predicates"];
    fj["responses"]["regenerate_relations"] = crop["responses"]["regenerate_relations"];
    fj["responses"]["resample_tokens"] = fj["responses"]["propose_criteria"];
    ScriptedProposer p(Fixture::from_json(fj));
    auto cfg = config_for(l.spec);
    cfg.max_reflection_iterations = 1;
    const auto r = run_task(l.spec.examples, p, cfg);
    CHECK(r.outcome == "no-rule");
    CHECK_FALSE(r.induced);
    CHECK(r.learn_calls > 1);
    CHECK(std::any_of(r.notes.begin(), r.notes.end(),
                      [](const std::string& n) { return n.find("failed verification on ex3,ex4,ex5") != std::string::npos; }));

    // threshold 0 turns the gate off
    ScriptedProposer q(Fixture::from_json(fj));
    cfg.verify_threshold = 0.0;
    const auto off = run_task(l.spec.examples, q, cfg);
    CHECK(off.outcome == "rule");
    CHECK(off.learn_calls == 1);
}

TEST_CASE("hallucinated proposal with the right structure still yields a rule over true facts") {
    auto l = load("hallucinated");
    const auto r = run_fixture("hallucinated");
    CHECK(r.outcome == "rule");
    REQUIRE(r.induced);
    CHECK(r.induced->hypothesis.text() == "target(A) :- fur_golden(A,B), play_together(A,B,C).");
    CHECK(r.induced->hypothesis.text().find("blue") == std::string::npos);
    CHECK(meta::is_consistent(r.induced->hypothesis, final_task(r, l.spec)).consistent);
}

TEST_CASE("contradictory labels exhaust reflection in stage order") {
    auto l = load("contradiction");
    const auto r = run_fixture("contradiction");
    CHECK(r.outcome == "no-rule");
    CHECK(r.status == "reflection-exhausted");
    CHECK_FALSE(r.induced);
    // per cycle: one unchanged requery, three crops, then a resample; the last cycle has no resample
    std::vector<int> expected;
    for (int cycle = 0; cycle < 4; ++cycle) {
        expected.insert(expected.end(), {1, 2, 2, 2});
        if (cycle < 3) {
            expected.push_back(3);
        }
    }
    CHECK(stages(r) == expected);
    for (const auto& e : r.trace) {
        CHECK(e.iteration >= 1);
        CHECK(e.iteration <= 3);
    }
    CHECK(r.learn_calls == 4 * 4);
    CHECK(trace_lines(r).find("\"event\":\"tokens-resampled\"") != std::string::npos);
    std::size_t lines = 0;
    for (char c : trace_lines(r)) {
        lines += c == '\n' ? 1 : 0;
    }
    CHECK(lines == r.trace.size());
}

TEST_CASE("reflection budget bounds every stage") {
    for (std::size_t max = 0; max <= 3; ++max) {
        auto l = load("contradiction");
        auto cfg = config_for(l.spec);
        cfg.max_reflection_iterations = max;
        const auto r = run_fixture("contradiction", &cfg);
        CHECK(r.outcome == "no-rule");
        std::map<int, std::size_t> per_cycle;
        for (const auto& e : r.trace) {
            CHECK(e.iteration <= max);
            if (e.stage == 3) {
                per_cycle.clear();
            } else {
                CHECK(++per_cycle[e.stage] <= max);
            }
        }
        const auto st = stages(r);
        CHECK(std::count(st.begin(), st.end(), 3) == static_cast<long>(max));
    }
    auto l = load("contradiction");
    auto cfg = config_for(l.spec);
    cfg.reflection = false;
    const auto r = run_fixture("contradiction", &cfg);
    CHECK(r.status == "reflection-disabled");
    CHECK(r.trace.empty());
    CHECK(r.learn_calls == 1);
}

TEST_CASE("stage 1 replaces a fact verified false and the rerun succeeds") {
    auto l = load("sunflower");
    const auto r = run_fixture("sunflower");
    CHECK(r.outcome == "rule");
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].stage == 1);
    CHECK(r.trace[0].event == "facts-requeried");
    CHECK(r.trace[0].detail["replaced"] == 1);
    CHECK(r.trace[0].detail["compound_facts"] == 2);
    REQUIRE(r.induced);
    CHECK(r.induced->hypothesis.text() == "target(A) :- face_to_sun(A,B).");
    const auto& ex3 = r.final_facts.at("ex3");
    CHECK(std::find(ex3.begin(), ex3.end(), "face_away_from_sun(sunflower)") != ex3.end());
    CHECK(std::find(ex3.begin(), ex3.end(), "direction_upright(sunflower)") != ex3.end());
    CHECK(std::find(ex3.begin(), ex3.end(), "face_to_sun(sunflower)") == ex3.end());
    CHECK(meta::is_consistent(r.induced->hypothesis, final_task(r, l.spec)).consistent);
    CHECK(r.learn_calls == 2);
}

TEST_CASE("stage 2 crop and regenerated relations succeed") {
    auto l = load("crop");
    const auto r = run_fixture("crop");
    CHECK(r.outcome == "rule");
    CHECK(stages(r) == std::vector<int>{1, 2});
    CHECK(r.cropped == std::vector<std::string>{"coat_tabby"});
    REQUIRE(r.induced);
    CHECK(r.induced->hypothesis.text() == "target(A) :- fur_golden(A,B), play_together(A,B,C).");
    // cropping narrows the task, the fact base keeps the cropped facts
    std::size_t tabby = 0;
    for (const auto& [id, facts] : r.final_facts) {
        tabby += static_cast<std::size_t>(std::count_if(facts.begin(), facts.end(),
                                                        [](const std::string& f) { return f.rfind("coat_tabby", 0) == 0; }));
    }
    CHECK(tabby > 0);
    CHECK(task_predicates_exclude(final_task(r, l.spec), "coat_tabby"));
    // learner oracle: the rule is among the brute-force consistent hypotheses of the final task
    const auto task = final_task(r, l.spec);
    const auto all = meta::enumerate_bruteforce(task, 1);
    CHECK(std::any_of(all.begin(), all.end(),
                      [&](const meta::Hypothesis& h) { return h.key() == r.induced->hypothesis.key(); }));
}

TEST_CASE("no-ilp baseline emits the proposal verbatim; ilp never emits an inconsistent rule") {
    auto l = load("contradiction");
    auto cfg = config_for(l.spec);
    cfg.mode = Mode::NoIlp;
    const auto base = run_fixture("contradiction", &cfg);
    CHECK(base.outcome == "rule");
    CHECK(base.status == "baseline");
    REQUIRE(base.induced);
    CHECK(base.induced->hypothesis.text() == "target(X) :- color_red(o1).");
    CHECK(base.learn_calls == 0);

    // Lifted into the scene encoding, the baseline rule fails verification.
    meta::Hypothesis lifted;
    lifted.clauses.push_back(scope_clause(base.induced->hypothesis.clauses[0], {"color_red", "color_grey"}));
    std::vector<ExampleFacts> exs;
    for (const auto& e : l.spec.examples) {
        ExampleFacts ef{e, {}, {}};
        for (const auto& f : base.final_facts.at(e.id)) {
            ef.facts.push_back(logic::parse_atom(f));
        }
        exs.push_back(ef);
    }
    const auto task = build_task(exs, {proposal::abstract_rule(lifted.clauses[0])});
    CHECK_FALSE(meta::is_consistent(lifted, task).consistent);

    for (const char* name : {"golden_dog", "hallucinated", "contradiction", "sunflower", "crop"}) {
        auto fl = load(name);
        const auto r = run_fixture(name);
        if (r.induced) {
            CHECK(meta::is_consistent(r.induced->hypothesis, final_task(r, fl.spec)).consistent);
        } else {
            CHECK(r.outcome == "no-rule");
        }
    }
}

TEST_CASE("scripted runs are deterministic and replay from their transcript") {
    for (const char* name : {"golden_dog", "sunflower", "crop", "contradiction"}) {
        const auto a = strip_volatile(to_json(run_fixture(name)));
        const auto b = strip_volatile(to_json(run_fixture(name)));
        CHECK(a == b);

        auto l = load(name);
        ScriptedProposer p(l.fixture);
        const auto r = run_task(l.spec.examples, p, config_for(l.spec));
        std::vector<proposer::Exchange> ex;
        for (const auto& e : r.transcript) {
            ex.push_back(proposer::exchange_from_json(json::parse(e.dump())));
        }
        ScriptedProposer replay(Fixture::from_transcript(ex));
        const auto again = run_task(l.spec.examples, replay, config_for(l.spec));
        CHECK(strip_volatile(to_json(again)) == strip_volatile(to_json(r)));
    }
}

TEST_CASE("run_id derives from seed and examples") {
    auto l = load("golden_dog");
    auto cfg = config_for(l.spec);
    const auto a = run_fixture("golden_dog", &cfg);
    cfg.seed = 1;
    const auto b = run_fixture("golden_dog", &cfg);
    CHECK(a.run_id != b.run_id);
    cfg.run_id = "fixed";
    CHECK(run_fixture("golden_dog", &cfg).run_id == "fixed");
}

TEST_CASE("pipeline preconditions and failure propagation") {
    auto l = load("golden_dog");
    ScriptedProposer p(l.fixture);
    auto cfg = config_for(l.spec);
    std::vector<ExampleDescriptor> negs = {{"ex1", proposal::Label::Negative, ""}};
    CHECK_THROWS_AS(run_task(negs, p, cfg), std::invalid_argument);
    std::vector<ExampleDescriptor> dup = {{"ex1", proposal::Label::Positive, ""}, {"ex1", proposal::Label::Negative, ""}};
    CHECK_THROWS_AS(run_task(dup, p, cfg), std::invalid_argument);
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(run_task(l.spec.examples, p, cfg), std::invalid_argument);

    ScriptedProposer empty(Fixture{});
    CHECK_THROWS_AS(run_task(l.spec.examples, empty, config_for(l.spec)), FixtureExhausted);

    class Failing : public proposer::Proposer {
    public:
        explicit Failing(proposer::Proposer& inner) : inner_(inner) {}
        proposer::ProposerResponse send(const proposer::ProposerRequest& r) override {
            if (r.kind == proposer::RequestKind::ProposeRuleStructures) {
                throw TransportError("connection refused");
            }
            return inner_.send(r);
        }

    private:
        proposer::Proposer& inner_;
    };
    ScriptedProposer inner(l.fixture);
    Failing failing(inner);
    CHECK_THROWS_AS(run_task(l.spec.examples, failing, config_for(l.spec)), TransportError);
}

TEST_CASE("unusable extractions are quarantined, not fatal") {
    auto l = load("golden_dog");
    auto fj = json::parse(std::ifstream(kFixtures + "/golden_dog/fixture.json"));
    fj["responses"]["extract_facts"]["keyed"]["ex5"] = {{"facts", "I cannot see the image :-( sorry"}};
    ScriptedProposer p(Fixture::from_json(fj));
    const auto r = run_task(l.spec.examples, p, config_for(l.spec));
    CHECK(std::any_of(r.quarantine.begin(), r.quarantine.end(),
                      [](const proposal::QuarantineEntry& q) { return q.example_id == "ex5"; }));
    CHECK(r.final_facts.at("ex5").empty());
}

TEST_CASE("classify by entailment, then by scorer") {
    auto l = load("golden_dog");
    const auto golden = run_fixture("golden_dog");
    REQUIRE(golden.induced);
    InducedRule hostile;
    hostile.hypothesis = hyp({"target(A) :- hostile(A, B, C)."});
    const std::map<std::string, InducedRule> classes = {{"friendly", *golden.induced}, {"hostile", hostile}};

    const std::string fixture = R"J({
      "responses": {
        "extract_facts": {"keyed": {
          "t1": {"facts": "fur_golden(dog). play_together(dog, cat)."},
          "t2": {"facts": "hostile(dog, cat)."},
          "t3": {"facts": "size_small(cat)."},
          "t4": {"facts": "fur_golden(dog). play_together(dog, cat). hostile(dog, cat)."},
          "t5": {"facts": "size_small(cat)."}
        }},
        "score_rule": {"keyed": {
          "target(A) :- fur_golden_dog(A), play_together_dog_cat(A).|t3": {"score": 0.2},
          "target(A) :- hostile(A,B,C).|t3": {"score": 0.7}
        }, "default": {"score": 0.4}}
      }
    })J";
    ScriptedProposer p(Fixture::from_json(json::parse(fixture)));
    auto ex = [](const char* id) { return ExampleDescriptor{id, proposal::Label::Positive, "scene"}; };

    auto c1 = classify(ex("t1"), classes, p, "cls");
    CHECK(c1.label == "friendly");
    CHECK(c1.method == "entailment");
    CHECK_FALSE(c1.tie);
    CHECK(classify(ex("t2"), classes, p, "cls").label == "hostile");

    auto c3 = classify(ex("t3"), classes, p, "cls");
    CHECK(c3.method == "scorer");
    CHECK(c3.label == "hostile");
    CHECK(c3.scores.at("hostile") == doctest::Approx(0.7));

    auto c4 = classify(ex("t4"), classes, p, "cls");
    CHECK(c4.label == "friendly");
    CHECK(c4.tie);

    auto c5 = classify(ex("t5"), classes, p, "cls");
    CHECK(c5.method == "scorer");
    CHECK(c5.label == "friendly");
    CHECK(c5.tie);

    CHECK_THROWS_AS(classify(ex("t1"), {{"friendly", *golden.induced}}, p, "cls"), std::invalid_argument);
}

TEST_CASE("task documents") {
    const auto t = parse_task_spec(json::parse(R"J({"examples": [{"id": "a", "label": "pos"}]})J"));
    CHECK(t.target == "target");
    CHECK(t.examples.size() == 1);
    CHECK_THROWS_AS(parse_task_spec(json::parse(R"J({"examples": [{"label": "pos"}]})J")), std::invalid_argument);
    CHECK_THROWS_AS(load_task_spec(kFixtures + "/nope.json"), std::invalid_argument);
    CHECK(parse_mode("no-ilp") == Mode::NoIlp);
    CHECK_THROWS_AS(parse_mode("cot"), std::invalid_argument);
}
