#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abductor/logic/term.hpp"
#include "abductor/meta/learner.hpp"

namespace abductor::bench {

/// Key identifying a rule up to body-literal order, clause order and variable
/// renaming. Two rules that differ only in how the learner ordered or named
/// things vote for the same key.
std::string rule_key(const std::vector<logic::Clause>& clauses);
inline std::string rule_key(const meta::Hypothesis& h) { return rule_key(h.clauses); }

struct VoteConfig {
    std::size_t group_size = 5;
    std::size_t sample_size = 300;
    std::uint64_t seed = 0;
};

/// Samples min(sample_size, n) of the indices 0..n-1 without replacement and
/// cuts them into groups of `group_size`; an incomplete trailing group is
/// dropped. Throws std::invalid_argument when n < group_size or group_size == 0.
std::vector<std::vector<std::size_t>> form_groups(std::size_t n, const VoteConfig& cfg, const std::string& cls = "");

/// Runs one group: class name, group index, member indices. Returns the
/// induced rule's key or nullopt when the group produced no rule.
using GroupRunner =
    std::function<std::optional<std::string>(const std::string&, std::size_t, const std::vector<std::size_t>&)>;

struct VoteResult {
    /// Modal key; empty when no group produced a rule.
    std::string rule;
    std::size_t votes = 0;
    std::size_t groups = 0;
    std::map<std::string, std::size_t> tally;
};

/// Most frequent key, ties to the lexicographically smallest.
VoteResult tally_votes(const std::vector<std::optional<std::string>>& keys);

/// class_sizes: number of examples available per class.
std::map<std::string, VoteResult> sample_then_vote(const std::map<std::string, std::size_t>& class_sizes,
                                                   const VoteConfig& cfg, const GroupRunner& run);
/// Same result; groups of every class are run across OpenMP threads. `run`
/// must be safe to call concurrently.
std::map<std::string, VoteResult> sample_then_vote_parallel(const std::map<std::string, std::size_t>& class_sizes,
                                                            const VoteConfig& cfg, const GroupRunner& run,
                                                            int threads = 0);

} // namespace abductor::bench
