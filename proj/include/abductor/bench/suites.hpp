#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "abductor/bench/grid.hpp"
#include "abductor/bench/inject.hpp"
#include "abductor/bench/scene.hpp"
#include "abductor/bench/vote.hpp"
#include "abductor/logic/term.hpp"
#include "abductor/pipeline/pipeline.hpp"

namespace abductor::bench {

/// Whether `learned` (object-level or scene-scoped clauses) labels every
/// held-out scene the way the ground-truth rule does.
bool equivalent_on(const std::vector<logic::Clause>& learned, const SceneRule& truth, const std::vector<Scene>& scenes);

/// Held-out scenes for the equivalence check: near misses from targeted
/// inversion plus uniformly random scenes.
std::vector<Scene> holdout_scenes(const SceneRule& truth, std::size_t n, std::uint64_t seed);

struct ClevrSynthConfig {
    std::size_t tasks = 50;
    std::size_t n_pos = 4;
    std::size_t n_neg = 4;
    /// Task i uses a random rule with rule_sizes[i % size] conditions.
    std::vector<std::size_t> rule_sizes = {3, 4, 5};
    InjectionRates fact_rates = kFacts3Rates;
    InjectionRates rule_rates = kRules1Rates;
    pipeline::Mode mode = pipeline::Mode::Ilp;
    bool reflection = true;
    std::size_t max_reflection_iterations = 3;
    std::chrono::milliseconds wall_time{10'000};
    std::size_t holdout = 60;
    std::uint64_t seed = 0;
    int jobs = 1;

    nlohmann::ordered_json to_json() const;
};

struct ClevrTaskResult {
    std::string id;
    std::string rule;
    std::size_t rule_size = 0;
    std::string status;
    /// Induced clauses, empty when no rule was produced.
    std::string learned;
    bool recovered = false;
    Rectification rectification;
    std::size_t learn_calls = 0;
};

struct ClevrSynthReport {
    ClevrSynthConfig config;
    std::vector<ClevrTaskResult> tasks;

    double accuracy() const;
    /// Rows "Facts (k)" keyed by ground-truth rule size.
    RectificationTable rectification() const;
    Rectification rectification_total() const;
    nlohmann::ordered_json to_json() const;
};

/// One run of the full pipeline per task against a SimulatedProposer. Tasks
/// are independent and spread over `jobs` OpenMP threads; results do not
/// depend on the thread count.
ClevrSynthReport run_clevr_synth(const ClevrSynthConfig& cfg);

/// "task\trule_size\tstatus\trecovered\tlearned" lines, then summary lines.
std::string format_clevr_report(const ClevrSynthReport& r);

struct VoteSuiteConfig {
    /// Positive scenes generated per class rule.
    std::size_t per_class = 300;
    VoteConfig vote;
    /// Class-specific near-miss negatives added to every group.
    std::size_t n_neg = 4;
    InjectionRates fact_rates{};
    InjectionRates rule_rates{};
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct VoteSuiteReport {
    std::map<std::string, VoteResult> results;
    /// rule_key of each generating rule, lifted to the scene encoding.
    std::map<std::string, std::string> expected;
    bool all_match() const;
};

/// Sample-then-vote over the three class rules: each group of positives plus
/// its own negatives is one pipeline run; the group votes with the key of its
/// induced rule. jobs > 1 runs groups across OpenMP threads.
VoteSuiteReport run_vote_suite(const VoteSuiteConfig& cfg);

struct GridSuiteConfig {
    std::size_t tasks = 30;
    std::size_t n_train = 3;
    std::size_t width = 12;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct GridTaskResult {
    std::string id;
    std::string transform;
    std::size_t hamming = 0;
    /// Hamming distance of the unchanged test input, as a do-nothing baseline.
    std::size_t baseline_hamming = 0;
    bool exact = false;
};

struct GridSuiteReport {
    std::vector<GridTaskResult> tasks;
    double mean_hamming() const;
    double mean_baseline_hamming() const;
    double accuracy() const;
    nlohmann::ordered_json to_json() const;
};

GridSuiteReport run_grid1d(const GridSuiteConfig& cfg);
/// Scores an explicit task list (e.g. ARC documents read from disk).
GridSuiteReport run_grid_tasks(const std::vector<ArcTask>& tasks, int jobs = 1);
std::string format_grid_report(const GridSuiteReport& r);

} // namespace abductor::bench
