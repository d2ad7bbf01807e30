#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "abductor/logic/term.hpp"

namespace abductor::logic {

/// Variable bindings in solved form: no bound variable occurs in any binding,
/// so applying a substitution twice is the same as applying it once.
class Substitution {
public:
    Substitution() = default;

    const Term* lookup(const std::string& var) const;
    bool empty() const noexcept { return bindings_.empty(); }
    std::size_t size() const noexcept { return bindings_.size(); }
    const std::map<std::string, Term>& bindings() const noexcept { return bindings_; }

    /// Adds var -> term, keeping solved form. Returns false if var occurs in term
    /// after resolution (occurs check) or var is already bound differently.
    bool bind(const std::string& var, const Term& term);

    Term apply(const Term& t) const;
    Atom apply(const Atom& a) const;
    Clause apply(const Clause& c) const;

    friend bool operator==(const Substitution&, const Substitution&) = default;

private:
    std::map<std::string, Term> bindings_;
};

std::string to_string(const Substitution& s);

/// Most general unifier with occurs check, or nullopt on predicate mismatch,
/// constant clash or occurs-check violation.
std::optional<Substitution> unify(const Atom& a, const Atom& b);
std::optional<Substitution> unify(const Term& a, const Term& b);

/// Renames every variable to `_G<epoch>_<k>`, k following first occurrence order.
Clause rename_apart(const Clause& c, std::uint64_t epoch);

/// Renames variables to A, B, C, ... (then A1, B1, ...) in first-occurrence order.
Clause canonical_variables(const Clause& c);

} // namespace abductor::logic
