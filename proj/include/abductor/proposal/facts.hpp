#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abductor/logic/term.hpp"

namespace abductor::proposal {

enum class TokenKind { Attribute, Relation, Transformation };
enum class StateDependence { SingleState, Transformation };
enum class Label { Positive, Negative };

const char* to_string(TokenKind k) noexcept;
const char* to_string(StateDependence s) noexcept;
const char* to_string(Label l) noexcept;
TokenKind parse_token_kind(std::string_view s);
Label parse_label(std::string_view s);

/// Named perceptual concept the fact extractor is asked to ground.
struct CaptureToken {
    std::string name;
    TokenKind kind = TokenKind::Attribute;
    std::string description;

    friend bool operator==(const CaptureToken&, const CaptureToken&) = default;
};

struct Criterion {
    CaptureToken token;
    std::vector<std::string> conditions;
    StateDependence state_dependence = StateDependence::SingleState;

    friend bool operator==(const Criterion&, const Criterion&) = default;
};

/// Throws std::invalid_argument if a transformation criterion is used on a
/// single-state task or a token name is not a predicate-name prefix.
void validate_criteria(const std::vector<Criterion>& criteria, bool multi_state);

struct FactSet {
    std::string example_id;
    Label label = Label::Positive;
    std::vector<logic::Atom> facts;
    /// fact text -> raw compound statement it was split from
    std::map<std::string, std::string> compound_origin;
};

struct QuarantineEntry {
    std::string example_id;
    std::string reason;
    std::string raw;

    friend bool operator==(const QuarantineEntry&, const QuarantineEntry&) = default;
};

struct NormalizedFacts {
    FactSet facts;
    std::vector<QuarantineEntry> quarantine;
    /// Human-readable notes about repairs, e.g. casing changes.
    std::vector<std::string> notes;
};

/// Parses proposer output into ground facts. Statements end at top-level '.'
/// or newline; a statement with top-level commas is a compound and is split.
/// Identifier casing is lowered when that is the only defect, duplicates are
/// removed, and everything else is quarantined with a reason.
/// Throws EmptyFactSet when no fact survives.
NormalizedFacts normalize_facts(std::string_view raw, const std::string& example_id, Label label);

/// One fact per line in Prolog form; normalize_facts reads it back unchanged.
std::string format_facts(const FactSet& fs);

/// `example_id<TAB>reason<TAB>raw`, one line per entry.
std::string quarantine_report(const std::vector<QuarantineEntry>& entries);

} // namespace abductor::proposal
