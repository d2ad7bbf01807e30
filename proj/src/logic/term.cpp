#include "abductor/logic/term.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace abductor::logic {

Term Term::variable(std::string name) {
    Term t;
    t.kind = Kind::Variable;
    t.name = std::move(name);
    return t;
}

Term Term::constant(std::string name) {
    Term t;
    t.kind = Kind::Constant;
    t.name = std::move(name);
    return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) {
        throw std::invalid_argument("compound term '" + functor + "' needs at least one argument");
    }
    Term t;
    t.kind = Kind::Compound;
    t.name = std::move(functor);
    t.args = std::move(args);
    return t;
}

bool Term::is_ground() const {
    if (kind == Kind::Variable) {
        return false;
    }
    return std::all_of(args.begin(), args.end(), [](const Term& a) { return a.is_ground(); });
}

bool Term::contains_variable(std::string_view var) const {
    if (kind == Kind::Variable) {
        return name == var;
    }
    return std::any_of(args.begin(), args.end(), [&](const Term& a) { return a.contains_variable(var); });
}

bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.name == b.name && a.args == b.args;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = a.kind <=> b.kind; c != 0) {
        return c;
    }
    if (auto c = a.name <=> b.name; c != 0) {
        return c;
    }
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
}

bool Atom::is_ground() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

bool operator==(const Atom& a, const Atom& b) {
    return a.predicate == b.predicate && a.args == b.args;
}

std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.predicate <=> b.predicate; c != 0) {
        return c;
    }
    if (auto c = a.args.size() <=> b.args.size(); c != 0) {
        return c;
    }
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
}

bool Clause::is_ground() const {
    return head.is_ground() &&
           std::all_of(body.begin(), body.end(), [](const Atom& a) { return a.is_ground(); });
}

bool Clause::is_connected() const {
    if (body.empty()) {
        return true;
    }
    std::vector<std::set<std::string>> vars;
    vars.reserve(body.size() + 1);
    auto collect = [](const Atom& a) {
        auto v = variables_of(a);
        return std::set<std::string>(v.begin(), v.end());
    };
    vars.push_back(collect(head));
    for (const auto& b : body) {
        vars.push_back(collect(b));
    }
    for (std::size_t i = 1; i < vars.size(); ++i) {
        bool shares = false;
        for (std::size_t j = 0; j < vars.size() && !shares; ++j) {
            if (i == j) {
                continue;
            }
            for (const auto& v : vars[i]) {
                if (vars[j].count(v) != 0) {
                    shares = true;
                    break;
                }
            }
        }
        if (!shares) {
            return false;
        }
    }
    return true;
}

Program::Program(std::vector<Clause> clauses) {
    for (auto& c : clauses) {
        add(std::move(c));
    }
}

void Program::add(Clause clause) {
    index_[clause.head.id()].push_back(clauses_.size());
    clauses_.push_back(std::move(clause));
}

const std::vector<std::size_t>& Program::positions(const PredicateId& id) const {
    static const std::vector<std::size_t> none;
    auto it = index_.find(id);
    return it == index_.end() ? none : it->second;
}

bool is_variable_name(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    const auto first = static_cast<unsigned char>(s[0]);
    if (std::isupper(first) == 0 && !(s[0] == '_' && s.size() > 1)) {
        return false;
    }
    return std::all_of(s.begin() + 1, s.end(), [](char ch) {
        const auto c = static_cast<unsigned char>(ch);
        return (c < 128 && std::isalnum(c) != 0) || ch == '_';
    });
}

bool is_identifier(std::string_view s) {
    if (s.empty() || s[0] < 'a' || s[0] > 'z') {
        return false;
    }
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

namespace {

void append_args(std::string& out, const std::vector<Term>& args) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += to_string(args[i]);
    }
    out += ')';
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
    if (t.is_variable()) {
        if (std::find(out.begin(), out.end(), t.name) == out.end()) {
            out.push_back(t.name);
        }
        return;
    }
    for (const auto& a : t.args) {
        collect_vars(a, out);
    }
}

} // namespace

std::string to_string(const Term& t) {
    if (!t.is_compound()) {
        return t.name;
    }
    std::string out = t.name;
    append_args(out, t.args);
    return out;
}

std::string to_string(const Atom& a) {
    std::string out = a.predicate;
    if (!a.args.empty()) {
        append_args(out, a.args);
    }
    return out;
}

std::string to_string(const Clause& c) {
    std::string out = to_string(c.head);
    if (!c.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i != 0) {
                out += ", ";
            }
            out += to_string(c.body[i]);
        }
    }
    out += '.';
    return out;
}

std::string to_string(const Program& p) {
    std::string out;
    for (const auto& c : p.clauses()) {
        out += to_string(c);
        out += '\n';
    }
    return out;
}

std::vector<std::string> variables_of(const Atom& a) {
    std::vector<std::string> out;
    for (const auto& t : a.args) {
        collect_vars(t, out);
    }
    return out;
}

std::vector<std::string> variables_of(const Clause& c) {
    std::vector<std::string> out;
    for (const auto& t : c.head.args) {
        collect_vars(t, out);
    }
    for (const auto& b : c.body) {
        for (const auto& t : b.args) {
            collect_vars(t, out);
        }
    }
    return out;
}

} // namespace abductor::logic
