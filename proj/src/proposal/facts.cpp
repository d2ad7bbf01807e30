#include "abductor/proposal/facts.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <stdexcept>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"

namespace abductor::proposal {

const char* to_string(TokenKind k) noexcept {
    switch (k) {
    case TokenKind::Attribute: return "attribute";
    case TokenKind::Relation: return "relation";
    case TokenKind::Transformation: return "transformation";
    }
    return "attribute";
}

const char* to_string(StateDependence s) noexcept {
    return s == StateDependence::SingleState ? "single-state" : "transformation";
}

const char* to_string(Label l) noexcept { return l == Label::Positive ? "positive" : "negative"; }

TokenKind parse_token_kind(std::string_view s) {
    if (s == "attribute") {
        return TokenKind::Attribute;
    }
    if (s == "relation") {
        return TokenKind::Relation;
    }
    if (s == "transformation") {
        return TokenKind::Transformation;
    }
    throw std::invalid_argument("unknown capture token kind '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
    if (s == "positive" || s == "pos" || s == "+") {
        return Label::Positive;
    }
    if (s == "negative" || s == "neg" || s == "-") {
        return Label::Negative;
    }
    throw std::invalid_argument("unknown label '" + std::string(s) + "'");
}

void validate_criteria(const std::vector<Criterion>& criteria, bool multi_state) {
    for (const auto& c : criteria) {
        if (!logic::is_identifier(c.token.name)) {
            throw std::invalid_argument("capture token '" + c.token.name + "' is not a predicate name prefix");
        }
        const bool transformation = c.state_dependence == StateDependence::Transformation ||
                                    c.token.kind == TokenKind::Transformation;
        if (transformation && !multi_state) {
            throw std::invalid_argument("transformation criterion '" + c.token.name + "' on a single-state task");
        }
    }
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

// Statements end at a top-level '.' or at a newline; '%' comments are skipped.
std::vector<std::string> split_statements(std::string_view raw) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    bool comment = false;
    auto flush = [&]() {
        auto t = trim(cur);
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
        cur.clear();
        depth = 0;
    };
    for (const char c : raw) {
        if (comment) {
            if (c == '\n') {
                comment = false;
                flush();
            }
            continue;
        }
        if (c == '%') {
            comment = true;
            continue;
        }
        if (c == '\n') {
            flush();
            continue;
        }
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == '.' && depth <= 0) {
            flush();
            continue;
        }
        cur += c;
    }
    flush();
    return out;
}

std::vector<std::string> split_top_level_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (const char c : s) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    out.push_back(trim(cur));
    return out;
}

// X, Y2 and _foo look like intended variables; Dog or Fur_Golden look like
// mis-cased names.
bool has_variable_like_token(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (std::isalpha(c) != 0 || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) != 0 || s[j] == '_')) {
                ++j;
            }
            const std::string tok = s.substr(i, j - i);
            if (tok[0] == '_') {
                return true;
            }
            if (std::isupper(static_cast<unsigned char>(tok[0])) != 0 &&
                std::all_of(tok.begin() + 1, tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; })) {
                return true;
            }
            i = j;
        } else {
            ++i;
        }
    }
    return false;
}

std::string lowercase(std::string s) {
    for (auto& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

} // namespace

NormalizedFacts normalize_facts(std::string_view raw, const std::string& example_id, Label label) {
    NormalizedFacts out;
    out.facts.example_id = example_id;
    out.facts.label = label;
    std::set<logic::Atom> seen;
    auto quarantine = [&](std::string reason, std::string text) {
        out.quarantine.push_back({example_id, std::move(reason), std::move(text)});
    };
    for (const auto& stmt : split_statements(raw)) {
        if (stmt.find(":-") != std::string::npos) {
            quarantine("rule, not a fact", stmt);
            continue;
        }
        const auto parts = split_top_level_commas(stmt);
        const bool compound = parts.size() > 1;
        for (const auto& frag : parts) {
            if (frag.empty()) {
                quarantine("empty fragment", stmt);
                continue;
            }
            std::optional<logic::Atom> atom;
            std::string error;
            try {
                atom = logic::parse_atom(frag);
                if (!atom->is_ground()) {
                    error = "non-ground fact";
                    atom.reset();
                }
            } catch (const SyntaxError& e) {
                error = e.what();
            }
            if (!atom && !has_variable_like_token(frag)) {
                const std::string lowered = lowercase(frag);
                try {
                    auto repaired = logic::parse_atom(lowered);
                    if (repaired.is_ground()) {
                        atom = std::move(repaired);
                        out.notes.push_back("normalized casing: '" + frag + "' -> '" + logic::to_string(*atom) + "'");
                    }
                } catch (const SyntaxError&) {
                }
            }
            if (!atom) {
                quarantine(error, frag);
                continue;
            }
            if (!seen.insert(*atom).second) {
                continue;
            }
            if (compound) {
                out.facts.compound_origin[logic::to_string(*atom)] = stmt;
            }
            out.facts.facts.push_back(std::move(*atom));
        }
    }
    if (out.facts.facts.empty()) {
        throw EmptyFactSet("no fact survived normalization for example '" + example_id + "'");
    }
    return out;
}

std::string format_facts(const FactSet& fs) {
    std::string out;
    for (const auto& f : fs.facts) {
        out += logic::to_string(f);
        out += ".\n";
    }
    return out;
}

std::string quarantine_report(const std::vector<QuarantineEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        auto clean = [](std::string s) {
            std::replace(s.begin(), s.end(), '\t', ' ');
            std::replace(s.begin(), s.end(), '\n', ' ');
            return s;
        };
        out += clean(e.example_id) + '\t' + clean(e.reason) + '\t' + clean(e.raw) + '\n';
    }
    return out;
}

} // namespace abductor::proposal
