#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "abductor/logic/prover.hpp"
#include "abductor/logic/term.hpp"
#include "abductor/meta/task.hpp"

namespace abductor::meta {

/// Which meta-rule produced a clause and what its placeholders were bound to.
struct ClauseProvenance {
    std::string metarule;
    /// placeholder -> predicate name, in the meta-rule's signature order
    std::vector<std::pair<std::string, std::string>> bindings;

    friend bool operator==(const ClauseProvenance&, const ClauseProvenance&) = default;
};

struct Hypothesis {
    std::vector<logic::Clause> clauses;
    std::vector<ClauseProvenance> provenance;

    std::size_t size() const noexcept { return clauses.size(); }
    bool empty() const noexcept { return clauses.empty(); }

    /// Clause texts joined by a space, in stored order.
    std::string text() const;

    /// Identity up to clause order and variable renaming.
    std::string key() const;
};

/// Sorts clauses by (meta-rule name, bound predicates) and renames variables
/// canonically.
Hypothesis canonical_form(Hypothesis h);

struct SearchBudget {
    static constexpr std::chrono::seconds kHardCap{300};

    std::size_t max_clauses = 3;
    std::size_t prover_depth = logic::kDefaultProverDepth;
    std::chrono::milliseconds wall_time{10'000};

    /// Throws std::invalid_argument unless every field is positive. Wall time
    /// above the hard cap is clamped.
    SearchBudget validated() const;
};

struct Found {
    std::vector<Hypothesis> hypotheses;
    double elapsed_s = 0;
};

struct NoHypothesis {
    double elapsed_s = 0;
};

struct Timeout {
    double elapsed_s = 0;
    std::optional<Hypothesis> best_partial;
};

using SearchOutcome = std::variant<Found, NoHypothesis, Timeout>;

const char* outcome_name(const SearchOutcome& o) noexcept;

struct ConsistencyReport {
    bool consistent = false;
    std::vector<logic::ProofStatus> positive_status;
    std::vector<logic::ProofStatus> negative_status;
    /// Positives not proved (indices into the task's E+).
    std::vector<std::size_t> failing_positives;
    /// Negatives proved or left undecided by the depth bound.
    std::vector<std::size_t> violated_negatives;
};

/// H u B must prove every positive and leave every negative NotProvable.
ConsistencyReport is_consistent(const Hypothesis& h, const Task& task,
                                std::size_t prover_depth = logic::kDefaultProverDepth);

/// Iterative deepening on hypothesis size; returns every consistent hypothesis
/// of the smallest size at which one exists (size 0 included), in canonical
/// form, sorted by key.
SearchOutcome learn(const Task& task, const SearchBudget& budget = {});

/// Every set of at most `max_clauses` meta-rule instantiations that is
/// consistent, ordered by (size, key). Reference implementation for tests.
/// Throws OracleTooLarge beyond 10 predicates or 2 clauses.
std::vector<Hypothesis> enumerate_bruteforce(const Task& task, std::size_t max_clauses,
                                             std::size_t prover_depth = logic::kDefaultProverDepth);

/// Same result as enumerate_bruteforce, candidate sets checked across OpenMP threads.
std::vector<Hypothesis> enumerate_bruteforce_parallel(const Task& task, std::size_t max_clauses,
                                                      std::size_t prover_depth = logic::kDefaultProverDepth);

/// All clauses obtainable from the task's meta-rules over its predicate domain,
/// with provenance, in deterministic order.
std::vector<std::pair<logic::Clause, ClauseProvenance>> all_instantiations(const Task& task);

} // namespace abductor::meta
