#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "abductor/logic/term.hpp"
#include "abductor/proposal/facts.hpp"

namespace abductor::bench {

struct InjectionRates {
    double missing = 0.0;
    double redundant = 0.0;
    double wrong = 0.0;
};

/// Injection rates for the "Facts (3)" setting.
inline constexpr InjectionRates kFacts3Rates{0.503, 0.860, 0.280};
/// Injection rates for the "Rules (1)" setting.
inline constexpr InjectionRates kRules1Rates{0.980, 0.996, 0.980};

struct InjectionConfig {
    InjectionRates rates;
    std::uint64_t seed = 0;
};

struct Mutation {
    logic::Atom original;
    logic::Atom corrupted;
    friend bool operator==(const Mutation&, const Mutation&) = default;
};

struct InjectionLog {
    std::vector<logic::Atom> dropped;
    std::vector<logic::Atom> spurious;
    std::vector<Mutation> mutated;
    /// Facts in the input, for rate bookkeeping.
    std::size_t total = 0;

    bool empty() const noexcept { return dropped.empty() && spurious.empty() && mutated.empty(); }
};

struct Injected {
    proposal::FactSet facts;
    InjectionLog log;
};

/// Per input fact, independently: dropped with p = missing; otherwise its value
/// is resampled with p = wrong; and with p = redundant a spurious sibling (same
/// object and attribute, a value absent from the input) is appended. Only
/// attribute facts (see split_predicate) can be mutated or get siblings.
/// Three uniform draws are consumed per fact whatever happens, so the stream
/// stays aligned across rate settings. Throws std::invalid_argument on a rate
/// outside [0,1].
Injected inject_hallucinations(const proposal::FactSet& fs, const InjectionConfig& cfg);

/// Applies the log backwards: undo mutations, remove spurious facts, re-add
/// dropped ones. Yields the input fact set (as a set; order is not kept).
proposal::FactSet invert(const proposal::FactSet& corrupted, const InjectionLog& log);

struct RateCount {
    std::size_t events = 0;
    std::size_t rectified = 0;
    /// 1.0 when there were no events.
    double rate() const noexcept { return events == 0 ? 1.0 : static_cast<double>(rectified) / static_cast<double>(events); }
    RateCount& operator+=(const RateCount& o) {
        events += o.events;
        rectified += o.rectified;
        return *this;
    }
};

struct Rectification {
    RateCount missing;
    RateCount redundant;
    RateCount wrong;
    Rectification& operator+=(const Rectification& o) {
        missing += o.missing;
        redundant += o.redundant;
        wrong += o.wrong;
        return *this;
    }
};

/// Dropped fact rectified = present in `final_facts`; spurious = absent;
/// mutated = original present.
Rectification rectification_report(const InjectionLog& log, const std::vector<logic::Atom>& final_facts);

/// One row per key (e.g. "Facts (3)").
using RectificationTable = std::map<std::string, Rectification>;

/// "row\tmissing\tredundant\twrong" header plus one line per row, rates with
/// three decimals and event counts in parentheses.
std::string format_rectification_table(const RectificationTable& t);

} // namespace abductor::bench
