#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abductor/logic/term.hpp"
#include "abductor/meta/metarule.hpp"
#include "abductor/proposal/facts.hpp"

namespace abductor::proposal {

/// Candidate rule from the proposer. Only its shape is trusted.
struct RuleProposal {
    std::vector<logic::Clause> clauses;
    std::string source_text;
};

struct ParsedProposals {
    std::vector<RuleProposal> proposals;
    std::vector<QuarantineEntry> quarantine;
};

/// Blank lines separate proposals; the clauses of one block form one
/// proposal, so a disjunctive rule is written as consecutive clauses.
/// Markdown fence lines and '%' comments are ignored. Clauses that do not
/// parse are quarantined under `source_id`.
ParsedProposals parse_rule_proposals(std::string_view text, const std::string& source_id);

/// Replaces predicates by placeholders P, Q, R, ... and constants or
/// variables by term variables A, B, C, ... in first-occurrence order
/// (head first). Compound arguments count as one term.
meta::MetaRule abstract_rule(const logic::Clause& clause);

/// Drops meta-rules whose structural digest was already seen; keeps first occurrence order.
std::vector<meta::MetaRule> dedupe_metarules(const std::vector<meta::MetaRule>& ms);

struct CropResult {
    std::vector<std::string> kept;
    std::vector<std::string> dropped;
};

/// Drops the floor(fraction * N) lowest-scored predicates; among equal scores
/// later names go first. `protect` is never dropped (the drop count shrinks
/// instead). Both outputs keep input order. Throws std::invalid_argument for a
/// missing score or fraction outside (0,1).
CropResult crop_predicates(const std::vector<std::string>& predicates, const std::map<std::string, double>& relevance,
                           double fraction = 0.2, const std::string& protect = "target");

} // namespace abductor::proposal
