#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "abductor/logic/term.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/meta/task.hpp"
#include "abductor/proposal/abstraction.hpp"
#include "abductor/proposal/facts.hpp"
#include "abductor/proposer/proposer.hpp"

namespace abductor::pipeline {

using ordered_json = nlohmann::ordered_json;

enum class Mode { Ilp, NoIlp };
const char* to_string(Mode m) noexcept;
Mode parse_mode(std::string_view s);

struct ExampleDescriptor {
    std::string id;
    proposal::Label label = proposal::Label::Positive;
    std::string descriptor;
};

/// Task document: {"target": name, "examples": [{"id", "label", "descriptor"}]}.
struct TaskSpec {
    std::string target = "target";
    std::vector<ExampleDescriptor> examples;
};
/// Throws std::invalid_argument on a malformed document.
TaskSpec parse_task_spec(const nlohmann::json& j);
TaskSpec load_task_spec(const std::string& path);

struct PipelineConfig {
    double alpha = 0.75;
    std::size_t max_reflection_iterations = 3;
    meta::SearchBudget budget;
    Mode mode = Mode::Ilp;
    std::uint64_t seed = 0;
    bool reflection = true;
    bool expand_nl = false;
    double crop_fraction = 0.2;
    std::string target = "target";
    /// Upper bound on hypotheses scored for selection; the rest are dropped in canonical order.
    std::size_t max_candidates = 64;
    /// A selected rule is accepted only when every positive scores at least
    /// this and every negative below it; otherwise reflection continues. 0 disables.
    double verify_threshold = 0.5;
    /// Empty: derived from seed and examples.
    std::string run_id;

    /// Throws std::invalid_argument.
    void validate() const;
    ordered_json to_json() const;
};

struct InducedRule {
    meta::Hypothesis hypothesis;
    std::string natural_text;
    std::string expansion;
    double score = 0.0;
    std::map<std::string, double> per_example_scores;
};

struct StageEvent {
    int stage = 0;
    std::string event;
    std::size_t iteration = 0;
    ordered_json detail = ordered_json::object();
};

struct RunReport {
    std::string run_id;
    /// "rule" or "no-rule"
    std::string outcome;
    /// found | baseline | reflection-exhausted | no-proposal | reflection-disabled
    std::string status;
    Mode mode = Mode::Ilp;
    std::optional<InducedRule> induced;
    std::vector<std::string> metarules;
    std::vector<StageEvent> trace;
    /// Fact base per example after reflection, cropped predicates included.
    std::map<std::string, std::vector<std::string>> final_facts;
    std::vector<std::string> cropped;
    std::vector<proposal::QuarantineEntry> quarantine;
    std::vector<std::string> low_confidence;
    std::vector<std::string> notes;
    std::size_t learn_calls = 0;
    ordered_json config;
    ordered_json timings = ordered_json::object();
    ordered_json transcript = ordered_json::array();
};

ordered_json to_json(const RunReport& r);
/// Drops timings and per-exchange timestamps, which are the only fields that
/// differ between a run and its replay.
ordered_json strip_volatile(ordered_json report);
/// One JSON object per line, one line per reflection event.
std::string trace_lines(const RunReport& r);

/// Selection score: alpha * mean(pos) - (1 - alpha) * mean(neg); an empty side counts 0.
double selection_score(const std::vector<double>& pos, const std::vector<double>& neg, double alpha);

/// Index of the selection-score argmax; ties (relative 1e-12) go to the smallest
/// `texts` entry. Throws std::invalid_argument on shape mismatch or no candidates.
std::size_t select_index(const std::vector<std::string>& texts, const std::vector<std::vector<double>>& pos,
                         const std::vector<std::vector<double>>& neg, double alpha);

/// pos[i][e] / neg[i][e]: score of candidate i on the e-th positive / negative example.
InducedRule select_rule(const std::vector<meta::Hypothesis>& candidates, const std::vector<std::vector<double>>& pos,
                        const std::vector<std::vector<double>>& neg, double alpha, const std::string& target = "target");

/// "target holds when: a holds and X has b or ...", "target always holds".
std::string naturalize(const meta::Hypothesis& h, const std::string& target = "target");

/// Per-example facts as used for task assembly.
struct ExampleFacts {
    ExampleDescriptor example;
    std::vector<logic::Atom> facts;
    std::map<std::string, std::string> compound_origin;
};

/// Wrapper name for a ground fact: fur_golden(dog) -> fur_golden_dog.
std::string wrapper_name(const logic::Atom& fact);

/// Rewrites a proposal clause into a clause over scene-scoped predicates:
///  - head unary on a variable, body unary on that variable, and no body
///    predicate is a unary fact predicate: kept (monadic wrapper layer);
///  - head unary on a variable and every body atom already has it first: kept;
///  - otherwise the head becomes target(S) with S fresh and every body atom
///    p(args) becomes p(S, args); a bodiless clause becomes target(S) :- h(S, args).
logic::Clause scope_clause(const logic::Clause& c, const std::set<std::string>& unary_fact_predicates,
                           const std::string& target = "target");

/// Meta-rules for a set of proposals, deduplicated in first-occurrence order.
std::vector<meta::MetaRule> metarules_for(const std::vector<proposal::RuleProposal>& proposals,
                                          const std::set<std::string>& unary_fact_predicates,
                                          const std::string& target = "target");

/// Background: p(ex, args) for every fact whose predicate is not cropped,
/// plus wrapper(ex) atoms when some meta-rule has a unary body literal.
/// Examples: target(ex), positive or negative by label.
meta::Task build_task(const std::vector<ExampleFacts>& examples, const std::vector<meta::MetaRule>& metarules,
                      const std::set<std::string>& cropped = {}, const std::string& target = "target");

/// Background program for a single example, same encoding as build_task.
logic::Program scoped_background(const ExampleFacts& ex, bool wrappers);

/// Full workflow. Proposer failures other than malformed replies propagate.
/// Throws std::invalid_argument without a positive example or with duplicate ids.
RunReport run_task(const std::vector<ExampleDescriptor>& examples, proposer::Proposer& proposer,
                   const PipelineConfig& config);

struct Classification {
    std::string label;
    bool tie = false;
    /// "entailment" or "scorer"
    std::string method;
    std::map<std::string, double> scores;
};

/// Throws std::invalid_argument with fewer than two classes.
Classification classify(const ExampleDescriptor& example, const std::map<std::string, InducedRule>& class_rules,
                        proposer::Proposer& proposer, const std::string& run_id,
                        const std::vector<std::string>& tokens = {}, const std::string& target = "target");

} // namespace abductor::pipeline
