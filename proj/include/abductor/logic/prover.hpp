#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "abductor/logic/term.hpp"

namespace abductor::logic {

enum class ProofStatus : std::uint8_t {
    Provable,
    NotProvable,
    /// No derivation within the bound, but some branch was cut by it: unknown.
    DepthExhausted,
};

const char* to_string(ProofStatus s) noexcept;

inline constexpr std::size_t kDefaultProverDepth = 25;

struct ProveOptions {
    /// Maximum derivation length, counted in resolution steps.
    std::size_t depth = kDefaultProverDepth;
    /// Hard cap on head-unification attempts for one call. Hitting it reports
    /// DepthExhausted with `limit_hit` set.
    std::uint64_t inference_limit = 2'000'000;
    bool trace = false;
    /// Only the NotProvable / not-NotProvable distinction is needed: the search
    /// may stop at the first cut branch and report DepthExhausted.
    bool exclusion_only = false;
};

struct ProofResult {
    ProofStatus status = ProofStatus::NotProvable;
    std::uint64_t inferences = 0;
    bool limit_hit = false;
    /// One line per resolution step of the successful derivation (trace mode only).
    std::vector<std::string> trace;
};

/// SLD resolution over a compiled program: leftmost goal, clauses in program
/// order, chronological backtracking, occurs check on. Clauses can be pushed and
/// popped on top of the base program, which is how hypotheses are tested
/// against fixed background knowledge.
///
/// Not thread-safe; use one instance per thread.
class Prover {
public:
    explicit Prover(const Program& program);
    ~Prover();
    Prover(Prover&&) noexcept;
    Prover& operator=(Prover&&) noexcept;
    Prover(const Prover&) = delete;
    Prover& operator=(const Prover&) = delete;

    void push(const Clause& clause);
    void pop();
    std::size_t size() const noexcept;

    ProofResult prove(std::span<const Atom> goals, const ProveOptions& options = {});
    ProofStatus status(const Atom& goal, const ProveOptions& options = {});

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ProofResult prove(const Program& program, std::span<const Atom> goals, std::size_t depth = kDefaultProverDepth);
ProofResult prove(const Program& program, std::span<const Atom> goals, const ProveOptions& options);

/// Proves each ground fact independently. Throws NonGroundExample if a fact has a variable.
std::vector<ProofStatus> entails(const Program& program, std::span<const Atom> facts,
                                 std::size_t depth = kDefaultProverDepth);

} // namespace abductor::logic
