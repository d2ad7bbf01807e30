#pragma once

#include <string_view>
#include <vector>

#include "abductor/errors.hpp"
#include "abductor/logic/term.hpp"

namespace abductor::logic {

/// Parses clause text:
///
///     clause := atom ("." | ":-" atom ("," atom)* ".")
///     atom   := ident | ident "(" term ("," term)* ")"
///     term   := VAR | ident | ident "(" term ("," term)* ")"
///
/// `%` starts a comment running to end of line. Throws SyntaxError with a
/// 1-based line/column on malformed input.
Program parse_program(std::string_view text);

Clause parse_clause(std::string_view text);

/// A single atom, with or without a trailing '.'.
Atom parse_atom(std::string_view text);

/// Comma-separated atoms, as used for goal lists (`p(X), q(X)`), optional trailing '.'.
std::vector<Atom> parse_goals(std::string_view text);

} // namespace abductor::logic
