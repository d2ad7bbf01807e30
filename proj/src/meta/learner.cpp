#include "abductor/meta/learner.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "abductor/errors.hpp"
#include "abductor/logic/unify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace abductor::meta {

using logic::Atom;
using logic::Clause;
using logic::PredicateId;
using logic::ProofStatus;
using logic::Prover;
using logic::ProveOptions;

std::string Hypothesis::text() const {
    std::string out;
    for (const auto& c : clauses) {
        if (!out.empty()) {
            out += ' ';
        }
        out += logic::to_string(c);
    }
    return out;
}

std::string Hypothesis::key() const {
    std::vector<std::string> parts;
    parts.reserve(clauses.size());
    for (const auto& c : clauses) {
        parts.push_back(logic::to_string(logic::canonical_variables(c)));
    }
    std::sort(parts.begin(), parts.end());
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) {
            out += ' ';
        }
        out += p;
    }
    return out;
}

Hypothesis canonical_form(Hypothesis h) {
    std::vector<std::size_t> order(h.clauses.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::vector<std::string> texts;
    for (const auto& c : h.clauses) {
        texts.push_back(logic::to_string(logic::canonical_variables(c)));
    }
    auto sort_key = [&](std::size_t i) {
        std::vector<std::string> bound;
        if (i < h.provenance.size()) {
            for (const auto& [var, pred] : h.provenance[i].bindings) {
                bound.push_back(pred);
            }
        }
        const std::string name = i < h.provenance.size() ? h.provenance[i].metarule : std::string();
        return std::tuple(name, bound, texts[i]);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sort_key(a) < sort_key(b); });
    Hypothesis out;
    for (const std::size_t i : order) {
        out.clauses.push_back(logic::canonical_variables(h.clauses[i]));
        if (i < h.provenance.size()) {
            out.provenance.push_back(h.provenance[i]);
        }
    }
    return out;
}

SearchBudget SearchBudget::validated() const {
    if (max_clauses == 0 || prover_depth == 0 || wall_time.count() <= 0) {
        throw std::invalid_argument("search budget fields must be positive");
    }
    SearchBudget b = *this;
    b.wall_time = std::min<std::chrono::milliseconds>(b.wall_time, kHardCap);
    return b;
}

const char* outcome_name(const SearchOutcome& o) noexcept {
    switch (o.index()) {
    case 0: return "found";
    case 1: return "no-hypothesis";
    default: return "timeout";
    }
}

ConsistencyReport is_consistent(const Hypothesis& h, const Task& task, std::size_t prover_depth) {
    Prover prover(task.background());
    for (const auto& c : h.clauses) {
        prover.push(c);
    }
    ProveOptions opts;
    opts.depth = prover_depth;
    ConsistencyReport r;
    for (std::size_t i = 0; i < task.positives().size(); ++i) {
        const auto s = prover.status(task.positives()[i], opts);
        r.positive_status.push_back(s);
        if (s != ProofStatus::Provable) {
            r.failing_positives.push_back(i);
        }
    }
    for (std::size_t i = 0; i < task.negatives().size(); ++i) {
        const auto s = prover.status(task.negatives()[i], opts);
        r.negative_status.push_back(s);
        if (s != ProofStatus::NotProvable) {
            r.violated_negatives.push_back(i);
        }
    }
    r.consistent = r.failing_positives.empty() && r.violated_negatives.empty();
    return r;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Negatives first (cheaper to refute), then positives; stops at the first failure.
bool quick_consistent(Prover& prover, const std::vector<const Clause*>& h, const Task& task, std::size_t depth) {
    for (const auto* c : h) {
        prover.push(*c);
    }
    ProveOptions opts;
    opts.depth = depth;
    opts.exclusion_only = true;
    bool ok = true;
    for (const auto& n : task.negatives()) {
        if (prover.status(n, opts) != ProofStatus::NotProvable) {
            ok = false;
            break;
        }
    }
    if (ok) {
        opts.exclusion_only = false;
        for (const auto& e : task.positives()) {
            if (prover.status(e, opts) != ProofStatus::Provable) {
                ok = false;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        prover.pop();
    }
    return ok;
}

ClauseProvenance provenance_of(const MetaRule& m, const std::map<std::string, std::string>& bound) {
    ClauseProvenance p;
    p.metarule = m.name();
    for (const auto& v : m.predicate_vars()) {
        if (auto it = bound.find(v); it != bound.end()) {
            p.bindings.emplace_back(v, it->second);
        }
    }
    return p;
}

// Depth-first binding of a meta-rule's placeholders. The head placeholder is
// the target; each body literal is bound left to right and `accept_prefix` may
// cut the branch once literal i has its predicate.
template <typename Prefix, typename Leaf>
void bind_metarule(const MetaRule& m, const PredicateId& target, const std::vector<PredicateId>& domain,
                   Prefix&& accept_prefix, Leaf&& leaf) {
    if (m.head().term_vars.size() != target.arity) {
        return;
    }
    std::map<std::string, std::string> bound{{m.head().predicate_var, target.name}};
    std::map<std::string, std::size_t> arity{{m.head().predicate_var, target.arity}};
    auto rec = [&](auto& self, std::size_t i) -> void {
        if (i == m.body().size()) {
            leaf(bound);
            return;
        }
        const auto& lit = m.body()[i];
        if (auto it = arity.find(lit.predicate_var); it != arity.end()) {
            if (it->second == lit.term_vars.size() && accept_prefix(bound, i)) {
                self(self, i + 1);
            }
            return;
        }
        for (const auto& p : domain) {
            if (p.arity != lit.term_vars.size()) {
                continue;
            }
            bound[lit.predicate_var] = p.name;
            arity[lit.predicate_var] = p.arity;
            if (accept_prefix(bound, i)) {
                self(self, i + 1);
            }
        }
        bound.erase(lit.predicate_var);
        arity.erase(lit.predicate_var);
    };
    rec(rec, 0);
}

bool is_tautology(const Clause& c) {
    return std::find(c.body.begin(), c.body.end(), c.head) != c.body.end();
}

struct TimedOut {};

struct Candidate {
    Clause clause;
    ClauseProvenance provenance;
    bool recursive = false;
    std::vector<std::uint64_t> covers;
    std::size_t coverage = 0;
};

class Search {
public:
    Search(const Task& task, const SearchBudget& budget)
        : task_(task), budget_(budget), start_(Clock::now()), deadline_(start_ + budget.wall_time),
          prover_(task.background()) {
        compute_dependents();
    }

    SearchOutcome run() {
        try {
            if (quick_consistent(prover_, {}, task_, budget_.prover_depth)) {
                return finish({Hypothesis{}});
            }
            generate();
            compositional_ = !entangled_ && std::none_of(candidates_.begin(), candidates_.end(),
                                                         [](const Candidate& c) { return c.recursive; });
            if (compositional_) {
                std::erase_if(candidates_, [](const Candidate& c) { return c.coverage == 0; });
            }
            for (std::size_t n = 1; n <= budget_.max_clauses; ++n) {
                found_.clear();
                seen_.clear();
                if (compositional_) {
                    cover_search(n);
                } else {
                    combination_search(n);
                }
                if (!found_.empty()) {
                    return finish(collect());
                }
            }
        } catch (const TimedOut&) {
            Timeout t;
            t.elapsed_s = seconds_since(start_);
            if (!found_.empty()) {
                t.best_partial = canonical_form(make_hypothesis(found_.front()));
            }
            return t;
        }
        return NoHypothesis{seconds_since(start_)};
    }

private:
    void tick() {
        if ((++nodes_ & 63U) == 0 && Clock::now() > deadline_) {
            throw TimedOut{};
        }
    }

    // Predicates whose extension can change when target clauses are added.
    void compute_dependents() {
        dependent_.insert(task_.target());
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& c : task_.background().clauses()) {
                if (dependent_.count(c.head.id()) != 0) {
                    continue;
                }
                for (const auto& b : c.body) {
                    if (dependent_.count(b.id()) != 0) {
                        dependent_.insert(c.head.id());
                        changed = true;
                        break;
                    }
                }
            }
        }
        for (const auto& c : task_.background().clauses()) {
            if (dependent_.count(c.head.id()) != 0) {
                entangled_ = true;
            }
        }
    }

    bool is_dependent(const Atom& a) const { return dependent_.count(a.id()) != 0; }

    // Whether some instantiation of m could call the target.
    bool may_recurse(const MetaRule& m) const {
        return std::any_of(m.body().begin(), m.body().end(), [&](const MetaAtom& lit) {
            return lit.predicate_var == m.head().predicate_var || lit.term_vars.size() == task_.target().arity;
        });
    }

    void generate() {
        const auto domain = task_.predicate_domain();
        ProveOptions probe;
        probe.depth = budget_.prover_depth;
        probe.exclusion_only = true;
        // Without recursion the search is a cover of E+, so a clause firing for
        // no positive is useless, and with one clause it must fire for all.
        const bool anchored = !entangled_ && std::none_of(task_.metarules().begin(), task_.metarules().end(),
                                                          [&](const MetaRule& m) { return may_recurse(m); });
        const bool cover_all = anchored && budget_.max_clauses == 1;
        for (const auto& m : task_.metarules()) {
            // A body whose fixed-extension literals have no joint solution in B
            // never fires, so no smallest hypothesis contains it.
            auto accept_prefix = [&](const std::map<std::string, std::string>& bound, std::size_t i) {
                tick();
                const auto& lit = m.body()[i];
                Atom added{bound.at(lit.predicate_var), {}};
                for (const auto& t : lit.term_vars) {
                    added.args.push_back(logic::Term::variable(t));
                }
                if (is_dependent(added)) {
                    return true;
                }
                std::vector<Atom> conj;
                for (std::size_t j = 0; j <= i; ++j) {
                    Atom a{bound.at(m.body()[j].predicate_var), {}};
                    for (const auto& t : m.body()[j].term_vars) {
                        a.args.push_back(logic::Term::variable(t));
                    }
                    if (!is_dependent(a)) {
                        conj.push_back(std::move(a));
                    }
                }
                if (!anchored) {
                    return prover_.prove(conj, probe).status != ProofStatus::NotProvable;
                }
                bool any = false;
                for (const auto& e : task_.positives()) {
                    std::vector<Atom> grounded = conj;
                    for (auto& a : grounded) {
                        for (auto& t : a.args) {
                            for (std::size_t k = 0; k < m.head().term_vars.size(); ++k) {
                                if (t.is_variable() && t.name == m.head().term_vars[k]) {
                                    t = e.args[k];
                                }
                            }
                        }
                    }
                    const bool fires = prover_.prove(grounded, probe).status != ProofStatus::NotProvable;
                    if (cover_all && !fires) {
                        return false;
                    }
                    any = any || fires;
                    if (any && !cover_all) {
                        break;
                    }
                }
                return any;
            };
            auto leaf = [&](const std::map<std::string, std::string>& bound) {
                tick();
                Clause c = instantiate(m, bound);
                if (is_tautology(c)) {
                    return;
                }
                Candidate cand;
                cand.recursive = std::any_of(c.body.begin(), c.body.end(), [&](const Atom& a) { return is_dependent(a); });
                cand.covers.assign((task_.positives().size() + 63) / 64, 0);
                prover_.push(c);
                bool excluded = true;
                for (const auto& n : task_.negatives()) {
                    if (prover_.status(n, probe) != ProofStatus::NotProvable) {
                        excluded = false;
                        break;
                    }
                }
                if (excluded) {
                    ProveOptions full;
                    full.depth = budget_.prover_depth;
                    for (std::size_t e = 0; e < task_.positives().size(); ++e) {
                        if (prover_.status(task_.positives()[e], full) == ProofStatus::Provable) {
                            cand.covers[e / 64] |= std::uint64_t{1} << (e % 64);
                            ++cand.coverage;
                        }
                    }
                }
                prover_.pop();
                if (!excluded) {
                    return;
                }
                cand.provenance = provenance_of(m, bound);
                cand.clause = std::move(c);
                candidates_.push_back(std::move(cand));
            };
            bind_metarule(m, task_.target(), domain, accept_prefix, leaf);
        }
    }

    // Without recursion through the target, H u B proves an example iff one
    // clause of H does, so a hypothesis is a cover of E+ by candidates that
    // each exclude E-. At the smallest size every clause is needed, so
    // branching on the first uncovered positive reaches every solution.
    void cover_search(std::size_t n) {
        const std::size_t npos = task_.positives().size();
        std::vector<std::uint64_t> covered((npos + 63) / 64, 0);
        std::vector<std::size_t> chosen;
        auto first_uncovered = [&]() -> std::size_t {
            for (std::size_t e = 0; e < npos; ++e) {
                if ((covered[e / 64] >> (e % 64) & 1U) == 0) {
                    return e;
                }
            }
            return npos;
        };
        auto rec = [&](auto& self) -> void {
            tick();
            const std::size_t e = first_uncovered();
            if (e == npos) {
                if (chosen.size() == n) {
                    record(chosen);
                }
                return;
            }
            if (chosen.size() == n) {
                return;
            }
            for (std::size_t i = 0; i < candidates_.size(); ++i) {
                if ((candidates_[i].covers[e / 64] >> (e % 64) & 1U) == 0) {
                    continue;
                }
                const auto saved = covered;
                for (std::size_t w = 0; w < covered.size(); ++w) {
                    covered[w] |= candidates_[i].covers[w];
                }
                chosen.push_back(i);
                self(self);
                chosen.pop_back();
                covered = saved;
            }
        };
        rec(rec);
    }

    // General case: all index-increasing combinations, negatives re-checked as
    // clauses accumulate (adding clauses never un-proves an atom).
    void combination_search(std::size_t n) {
        std::vector<std::size_t> chosen;
        std::vector<const Clause*> clauses;
        ProveOptions probe;
        probe.depth = budget_.prover_depth;
        probe.exclusion_only = true;
        auto rec = [&](auto& self, std::size_t from) -> void {
            tick();
            if (chosen.size() == n) {
                if (quick_consistent(prover_, clauses, task_, budget_.prover_depth)) {
                    record(chosen);
                }
                return;
            }
            for (std::size_t i = from; i < candidates_.size(); ++i) {
                chosen.push_back(i);
                clauses.push_back(&candidates_[i].clause);
                bool ok = true;
                if (clauses.size() >= 2 && clauses.size() < n && !task_.negatives().empty()) {
                    for (const auto* c : clauses) {
                        prover_.push(*c);
                    }
                    for (const auto& neg : task_.negatives()) {
                        if (prover_.status(neg, probe) != ProofStatus::NotProvable) {
                            ok = false;
                            break;
                        }
                    }
                    for (std::size_t k = 0; k < clauses.size(); ++k) {
                        prover_.pop();
                    }
                }
                if (ok) {
                    self(self, i + 1);
                }
                chosen.pop_back();
                clauses.pop_back();
            }
        };
        rec(rec, 0);
    }

    void record(std::vector<std::size_t> chosen) {
        std::sort(chosen.begin(), chosen.end());
        if (seen_.insert(chosen).second) {
            found_.push_back(std::move(chosen));
        }
    }

    Hypothesis make_hypothesis(const std::vector<std::size_t>& idx) const {
        Hypothesis h;
        for (const std::size_t i : idx) {
            h.clauses.push_back(candidates_[i].clause);
            h.provenance.push_back(candidates_[i].provenance);
        }
        return h;
    }

    std::vector<Hypothesis> collect() const {
        std::map<std::string, Hypothesis> by_key;
        for (const auto& idx : found_) {
            auto h = canonical_form(make_hypothesis(idx));
            auto k = h.key();
            by_key.try_emplace(std::move(k), std::move(h));
        }
        std::vector<Hypothesis> out;
        for (auto& [k, h] : by_key) {
            out.push_back(std::move(h));
        }
        return out;
    }

    SearchOutcome finish(std::vector<Hypothesis> hs) const {
        for (const auto& h : hs) {
            if (!is_consistent(h, task_, budget_.prover_depth).consistent) {
                throw std::logic_error("learner produced an inconsistent hypothesis: " + h.text());
            }
        }
        return Found{std::move(hs), seconds_since(start_)};
    }

    const Task& task_;
    SearchBudget budget_;
    Clock::time_point start_;
    Clock::time_point deadline_;
    Prover prover_;
    std::set<PredicateId> dependent_;
    bool entangled_ = false;
    bool compositional_ = false;
    std::vector<Candidate> candidates_;
    std::vector<std::vector<std::size_t>> found_;
    std::set<std::vector<std::size_t>> seen_;
    std::uint64_t nodes_ = 0;
};

// Index multisets of size k over n items, each sorted ascending.
void multisets(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> cur;
    auto rec = [&](auto& self, std::size_t from) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = from; i < n; ++i) {
            cur.push_back(i);
            self(self, i);
            cur.pop_back();
        }
    };
    rec(rec, 0);
}

std::vector<Hypothesis> bruteforce(const Task& task, std::size_t max_clauses, std::size_t depth, bool parallel) {
    if (task.predicate_domain().size() > 10 || max_clauses > 2) {
        throw OracleTooLarge("brute-force enumeration is limited to 10 predicates and 2 clauses");
    }
    const auto inst = all_instantiations(task);
    std::vector<std::vector<std::size_t>> combos;
    for (std::size_t k = 0; k <= max_clauses; ++k) {
        if (k > 0 && inst.empty()) {
            break;
        }
        multisets(inst.size(), k, combos);
    }
    std::vector<char> ok(combos.size(), 0);
    auto check = [&](Prover& prover, std::size_t i) {
        std::vector<const Clause*> h;
        for (const std::size_t j : combos[i]) {
            if (h.empty() || h.back() != &inst[j].first) {
                h.push_back(&inst[j].first);
            }
        }
        ok[i] = quick_consistent(prover, h, task, depth) ? 1 : 0;
    };
    const auto total = static_cast<std::int64_t>(combos.size());
    if (parallel) {
#pragma omp parallel
        {
            Prover local(task.background());
#pragma omp for schedule(dynamic, 16)
            for (std::int64_t i = 0; i < total; ++i) {
                check(local, static_cast<std::size_t>(i));
            }
        }
    } else {
        Prover prover(task.background());
        for (std::int64_t i = 0; i < total; ++i) {
            check(prover, static_cast<std::size_t>(i));
        }
    }
    std::map<std::string, Hypothesis> by_key;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        if (ok[i] == 0) {
            continue;
        }
        Hypothesis h;
        std::set<std::size_t> distinct(combos[i].begin(), combos[i].end());
        for (const std::size_t j : distinct) {
            h.clauses.push_back(inst[j].first);
            h.provenance.push_back(inst[j].second);
        }
        h = canonical_form(std::move(h));
        by_key.try_emplace(h.key(), std::move(h));
    }
    std::vector<Hypothesis> out;
    for (auto& [k, h] : by_key) {
        out.push_back(std::move(h));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.size() < b.size(); });
    return out;
}

} // namespace

SearchOutcome learn(const Task& task, const SearchBudget& budget) {
    Search search(task, budget.validated());
    return search.run();
}

std::vector<std::pair<Clause, ClauseProvenance>> all_instantiations(const Task& task) {
    std::vector<std::pair<Clause, ClauseProvenance>> out;
    const auto domain = task.predicate_domain();
    for (const auto& m : task.metarules()) {
        bind_metarule(
            m, task.target(), domain, [](const auto&, std::size_t) { return true; },
            [&](const std::map<std::string, std::string>& bound) {
                out.emplace_back(instantiate(m, bound), provenance_of(m, bound));
            });
    }
    return out;
}

std::vector<Hypothesis> enumerate_bruteforce(const Task& task, std::size_t max_clauses, std::size_t prover_depth) {
    return bruteforce(task, max_clauses, prover_depth, false);
}

std::vector<Hypothesis> enumerate_bruteforce_parallel(const Task& task, std::size_t max_clauses,
                                                      std::size_t prover_depth) {
    return bruteforce(task, max_clauses, prover_depth, true);
}

} // namespace abductor::meta
