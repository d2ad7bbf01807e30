#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abductor/logic/term.hpp"

namespace abductor::meta {

/// One second-order literal: a predicate placeholder applied to term variables.
struct MetaAtom {
    std::string predicate_var;
    std::vector<std::string> term_vars;

    friend bool operator==(const MetaAtom&, const MetaAtom&) = default;
};

/// Second-order clause template, e.g. `[[P,Q,R],[P,A,B],[[Q,A],[R,B]]]`:
/// "to prove P(A,B), prove Q(A) and R(B)".
class MetaRule {
public:
    /// Throws UnboundPredicateVar if head or body uses a placeholder missing
    /// from `predicate_vars`, std::invalid_argument on malformed term variables.
    static MetaRule make(std::vector<std::string> predicate_vars, MetaAtom head, std::vector<MetaAtom> body);

    const std::vector<std::string>& predicate_vars() const noexcept { return predicate_vars_; }
    const MetaAtom& head() const noexcept { return head_; }
    const std::vector<MetaAtom>& body() const noexcept { return body_; }

    /// Stable digest of the structure; alpha-variants share it.
    const std::string& name() const noexcept { return name_; }

    /// Bracketed triple text, parseable by parse_metarule.
    std::string encode() const;

    /// Placeholder-renamed structure string the digest is computed from.
    std::string canonical_structure() const;

    friend bool operator==(const MetaRule& a, const MetaRule& b) {
        return a.predicate_vars_ == b.predicate_vars_ && a.head_ == b.head_ && a.body_ == b.body_;
    }

private:
    std::vector<std::string> predicate_vars_;
    MetaAtom head_;
    std::vector<MetaAtom> body_;
    std::string name_;
};

/// Parses one bracketed triple. Throws SyntaxError / UnboundPredicateVar.
MetaRule parse_metarule(std::string_view text);

/// Meta-rule file: one triple per line, `%` comments, blank lines ignored.
std::vector<MetaRule> parse_metarules(std::string_view text);

/// First-order clause obtained by substituting predicates for placeholders.
/// Term variables become clause variables of the same name.
logic::Clause instantiate(const MetaRule& m, const std::map<std::string, std::string>& predicates);

} // namespace abductor::meta
