#pragma once

#include <filesystem>
#include <vector>

#include "abductor/logic/term.hpp"
#include "abductor/meta/metarule.hpp"

namespace abductor::meta {

/// Learning problem: background B, examples E+ / E-, meta-rules. Immutable.
class Task {
public:
    /// Throws InvalidTask when E+ is empty, an example is not a ground atom of
    /// the target predicate, or an atom is both positive and negative. The
    /// target defaults to the predicate of the first positive.
    static Task make(logic::Program background, std::vector<logic::Atom> positives,
                     std::vector<logic::Atom> negatives, std::vector<MetaRule> metarules);
    static Task make(logic::Program background, std::vector<logic::Atom> positives,
                     std::vector<logic::Atom> negatives, std::vector<MetaRule> metarules,
                     logic::PredicateId target);

    const logic::Program& background() const noexcept { return background_; }
    const std::vector<logic::Atom>& positives() const noexcept { return positives_; }
    const std::vector<logic::Atom>& negatives() const noexcept { return negatives_; }
    const std::vector<MetaRule>& metarules() const noexcept { return metarules_; }
    const logic::PredicateId& target() const noexcept { return target_; }

    /// Predicates a placeholder may be bound to: those of B plus the target, sorted.
    std::vector<logic::PredicateId> predicate_domain() const;

private:
    logic::Program background_;
    std::vector<logic::Atom> positives_;
    std::vector<logic::Atom> negatives_;
    std::vector<MetaRule> metarules_;
    logic::PredicateId target_;
};

/// Reads `bk.pl`, `pos.pl`, optional `neg.pl` and `metarules.txt` from `dir`.
Task load_task_bundle(const std::filesystem::path& dir);

} // namespace abductor::meta
