#include "abductor/logic/unify.hpp"

#include <utility>
#include <vector>

namespace abductor::logic {

const Term* Substitution::lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
    if (t.is_variable()) {
        const Term* b = lookup(t.name);
        return b != nullptr ? *b : t;
    }
    if (t.is_constant()) {
        return t;
    }
    Term out = t;
    for (auto& a : out.args) {
        a = apply(a);
    }
    return out;
}

Atom Substitution::apply(const Atom& a) const {
    Atom out = a;
    for (auto& t : out.args) {
        t = apply(t);
    }
    return out;
}

Clause Substitution::apply(const Clause& c) const {
    Clause out;
    out.head = apply(c.head);
    out.body.reserve(c.body.size());
    for (const auto& b : c.body) {
        out.body.push_back(apply(b));
    }
    return out;
}

bool Substitution::bind(const std::string& var, const Term& term) {
    const Term resolved = apply(term);
    if (resolved.is_variable() && resolved.name == var) {
        return true;
    }
    if (resolved.contains_variable(var)) {
        return false;
    }
    if (const Term* existing = lookup(var)) {
        return *existing == resolved;
    }
    Substitution single;
    single.bindings_.emplace(var, resolved);
    for (auto& [name, value] : bindings_) {
        value = single.apply(value);
    }
    bindings_.emplace(var, resolved);
    return true;
}

std::string to_string(const Substitution& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& [var, value] : s.bindings()) {
        if (!first) {
            out += ", ";
        }
        first = false;
        out += var + "->" + to_string(value);
    }
    out += '}';
    return out;
}

namespace {

bool unify_into(Substitution& s, const Term& a, const Term& b) {
    std::vector<std::pair<Term, Term>> work;
    work.emplace_back(a, b);
    while (!work.empty()) {
        auto [x, y] = std::move(work.back());
        work.pop_back();
        x = s.apply(x);
        y = s.apply(y);
        if (x == y) {
            continue;
        }
        if (x.is_variable()) {
            if (!s.bind(x.name, y)) {
                return false;
            }
        } else if (y.is_variable()) {
            if (!s.bind(y.name, x)) {
                return false;
            }
        } else if (x.is_compound() && y.is_compound() && x.name == y.name && x.args.size() == y.args.size()) {
            for (std::size_t i = x.args.size(); i-- > 0;) {
                work.emplace_back(std::move(x.args[i]), std::move(y.args[i]));
            }
        } else {
            return false;
        }
    }
    return true;
}

class Renamer {
public:
    explicit Renamer(std::vector<std::string> fresh_names) : fresh_(std::move(fresh_names)) {}

    Term term(const Term& t) {
        if (t.is_variable()) {
            auto [it, inserted] = map_.try_emplace(t.name, "");
            if (inserted) {
                it->second = fresh_[next_++];
            }
            return Term::variable(it->second);
        }
        Term out = t;
        for (auto& a : out.args) {
            a = term(a);
        }
        return out;
    }

    Atom atom(const Atom& a) {
        Atom out;
        out.predicate = a.predicate;
        out.args.reserve(a.args.size());
        for (const auto& t : a.args) {
            out.args.push_back(term(t));
        }
        return out;
    }

    Clause clause(const Clause& c) {
        Clause out;
        out.head = atom(c.head);
        for (const auto& b : c.body) {
            out.body.push_back(atom(b));
        }
        return out;
    }

private:
    std::vector<std::string> fresh_;
    std::map<std::string, std::string> map_;
    std::size_t next_ = 0;
};

std::string letter_name(std::size_t k) {
    std::string s(1, static_cast<char>('A' + k % 26));
    if (k >= 26) {
        s += std::to_string(k / 26);
    }
    return s;
}

} // namespace

std::optional<Substitution> unify(const Term& a, const Term& b) {
    Substitution s;
    if (!unify_into(s, a, b)) {
        return std::nullopt;
    }
    return s;
}

std::optional<Substitution> unify(const Atom& a, const Atom& b) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) {
        return std::nullopt;
    }
    Substitution s;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!unify_into(s, a.args[i], b.args[i])) {
            return std::nullopt;
        }
    }
    return s;
}

Clause rename_apart(const Clause& c, std::uint64_t epoch) {
    const auto vars = variables_of(c);
    std::vector<std::string> fresh;
    fresh.reserve(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) {
        fresh.push_back("_G" + std::to_string(epoch) + "_" + std::to_string(k));
    }
    return Renamer(std::move(fresh)).clause(c);
}

Clause canonical_variables(const Clause& c) {
    const auto vars = variables_of(c);
    std::vector<std::string> fresh;
    fresh.reserve(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) {
        fresh.push_back(letter_name(k));
    }
    return Renamer(std::move(fresh)).clause(c);
}

} // namespace abductor::logic
