#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace abductor::logic {

/// A first-order term: variable, constant or compound f(t1,...,tn) with n >= 1.
struct Term {
    enum class Kind : std::uint8_t { Variable, Constant, Compound };

    Kind kind = Kind::Constant;
    std::string name;
    std::vector<Term> args;

    static Term variable(std::string name);
    static Term constant(std::string name);
    static Term compound(std::string functor, std::vector<Term> args);

    bool is_variable() const noexcept { return kind == Kind::Variable; }
    bool is_constant() const noexcept { return kind == Kind::Constant; }
    bool is_compound() const noexcept { return kind == Kind::Compound; }
    bool is_ground() const;
    bool contains_variable(std::string_view var) const;

    friend bool operator==(const Term& a, const Term& b);
    friend std::strong_ordering operator<=>(const Term& a, const Term& b);
};

/// Predicate identity: name plus arity. `p/1` and `p/2` are different predicates.
struct PredicateId {
    std::string name;
    std::size_t arity = 0;

    std::string str() const { return name + "/" + std::to_string(arity); }

    friend bool operator==(const PredicateId&, const PredicateId&) = default;
    friend auto operator<=>(const PredicateId&, const PredicateId&) = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    PredicateId id() const { return {predicate, args.size()}; }
    bool is_ground() const;

    friend bool operator==(const Atom& a, const Atom& b);
    friend std::strong_ordering operator<=>(const Atom& a, const Atom& b);
};

/// Definite clause. An empty body makes it a fact.
struct Clause {
    Atom head;
    std::vector<Atom> body;

    bool is_fact() const noexcept { return body.empty(); }
    bool is_ground() const;

    /// True when every body atom shares a variable with the head or with another body atom.
    bool is_connected() const;

    friend bool operator==(const Clause&, const Clause&) = default;
};

/// Ordered clause list with a predicate index kept consistent with it.
class Program {
public:
    Program() = default;
    explicit Program(std::vector<Clause> clauses);

    void add(Clause clause);
    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    std::size_t size() const noexcept { return clauses_.size(); }
    bool empty() const noexcept { return clauses_.empty(); }

    /// Positions of clauses whose head has the given predicate identity, in program order.
    const std::vector<std::size_t>& positions(const PredicateId& id) const;
    const std::map<PredicateId, std::vector<std::size_t>>& index() const noexcept { return index_; }

    friend bool operator==(const Program& a, const Program& b) { return a.clauses_ == b.clauses_; }

private:
    std::vector<Clause> clauses_;
    std::map<PredicateId, std::vector<std::size_t>> index_;
};

bool is_variable_name(std::string_view s);
bool is_identifier(std::string_view s);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Clause& c);
std::string to_string(const Program& p);

/// Variables in left-to-right first-occurrence order.
std::vector<std::string> variables_of(const Atom& a);
std::vector<std::string> variables_of(const Clause& c);

} // namespace abductor::logic
