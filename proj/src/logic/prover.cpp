#include "abductor/logic/prover.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "abductor/errors.hpp"

namespace abductor::logic {

const char* to_string(ProofStatus s) noexcept {
    switch (s) {
    case ProofStatus::Provable:
        return "provable";
    case ProofStatus::NotProvable:
        return "not-provable";
    case ProofStatus::DepthExhausted:
        return "depth-exhausted";
    }
    return "?";
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Ref: a = referenced cell (self when unbound). In templates a = local var id.
// Con: a = symbol. Fun: a = symbol, b = arity, arguments follow inline.
// Str: a = index of the Fun cell (relative to template start in templates).
enum class Tag : std::uint8_t { Ref, Con, Fun, Str };

struct Cell {
    Tag tag;
    std::uint32_t a;
    std::uint32_t b;
};

struct Template {
    std::vector<Cell> cells;
    std::vector<std::uint32_t> body;
    std::uint32_t nvars = 0;
    std::uint32_t first_arg_const = kNone;
    std::uint64_t key = 0;
};

struct GoalNode {
    std::uint32_t fun;
    std::int32_t next;
};

std::uint64_t pred_key(std::uint32_t sym, std::uint32_t arity) {
    return (static_cast<std::uint64_t>(sym) << 32U) | arity;
}

} // namespace

struct Prover::Impl {
    std::unordered_map<std::string, std::uint32_t> symbol_ids;
    std::vector<std::string> symbols;
    std::vector<Template> clauses;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;

    // per-call state
    std::vector<Cell> heap;
    std::vector<std::uint32_t> trail;
    std::vector<GoalNode> nodes;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> unify_stack;
    std::size_t bound = 0;
    bool cut = false;
    bool abort = false;
    bool exclusion_only = false;
    bool tracing = false;
    std::uint64_t inferences = 0;
    std::uint64_t limit = 0;
    std::uint64_t epoch = 0;
    std::vector<std::string> trace;

    std::uint32_t intern(const std::string& s) {
        auto [it, inserted] = symbol_ids.try_emplace(s, static_cast<std::uint32_t>(symbols.size()));
        if (inserted) {
            symbols.push_back(s);
        }
        return it->second;
    }

    // --- compilation -----------------------------------------------------

    struct Compiler {
        Impl& impl;
        std::vector<Cell>& cells;
        std::unordered_map<std::string, std::uint32_t> vars;

        Cell arg(const Term& t) {
            switch (t.kind) {
            case Term::Kind::Variable: {
                auto [it, inserted] = vars.try_emplace(t.name, static_cast<std::uint32_t>(vars.size()));
                return {Tag::Ref, it->second, 0};
            }
            case Term::Kind::Constant:
                return {Tag::Con, impl.intern(t.name), 0};
            case Term::Kind::Compound:
                return {Tag::Str, structure(t.name, t.args), 0};
            }
            return {Tag::Con, 0, 0};
        }

        std::uint32_t structure(const std::string& name, const std::vector<Term>& args) {
            const auto at = static_cast<std::uint32_t>(cells.size());
            cells.push_back({Tag::Fun, impl.intern(name), static_cast<std::uint32_t>(args.size())});
            cells.resize(cells.size() + args.size(), Cell{Tag::Con, 0, 0});
            for (std::size_t i = 0; i < args.size(); ++i) {
                const Cell c = arg(args[i]);
                cells[at + 1 + i] = c;
            }
            return at;
        }
    };

    Template compile(const Clause& c) {
        Template t;
        Compiler comp{*this, t.cells, {}};
        comp.structure(c.head.predicate, c.head.args);
        for (const auto& b : c.body) {
            t.body.push_back(comp.structure(b.predicate, b.args));
        }
        t.nvars = static_cast<std::uint32_t>(comp.vars.size());
        t.key = pred_key(t.cells[0].a, t.cells[0].b);
        if (t.cells[0].b > 0 && t.cells[1].tag == Tag::Con) {
            t.first_arg_const = t.cells[1].a;
        }
        return t;
    }

    void add(const Clause& c) {
        clauses.push_back(compile(c));
        index[clauses.back().key].push_back(static_cast<std::uint32_t>(clauses.size() - 1));
    }

    // --- heap ------------------------------------------------------------

    std::uint32_t deref(std::uint32_t i) const {
        while (heap[i].tag == Tag::Ref && heap[i].a != i) {
            i = heap[i].a;
        }
        return i;
    }

    // Copies a template onto the heap; returns the base index of its cells.
    std::uint32_t instantiate(const Template& t) {
        const auto varbase = static_cast<std::uint32_t>(heap.size());
        for (std::uint32_t v = 0; v < t.nvars; ++v) {
            heap.push_back({Tag::Ref, varbase + v, 0});
        }
        const auto base = static_cast<std::uint32_t>(heap.size());
        for (const Cell& c : t.cells) {
            switch (c.tag) {
            case Tag::Ref:
                heap.push_back({Tag::Ref, varbase + c.a, 0});
                break;
            case Tag::Str:
                heap.push_back({Tag::Str, base + c.a, 0});
                break;
            default:
                heap.push_back(c);
                break;
            }
        }
        return base;
    }

    bool occurs(std::uint32_t var, std::uint32_t t) const {
        t = deref(t);
        if (t == var) {
            return true;
        }
        if (heap[t].tag != Tag::Str) {
            return false;
        }
        const std::uint32_t f = heap[t].a;
        for (std::uint32_t k = 0; k < heap[f].b; ++k) {
            if (occurs(var, f + 1 + k)) {
                return true;
            }
        }
        return false;
    }

    void bind(std::uint32_t var, std::uint32_t target) {
        heap[var].a = target;
        trail.push_back(var);
    }

    bool unify_args(std::uint32_t f1, std::uint32_t f2) {
        const Cell& a = heap[f1];
        const Cell& b = heap[f2];
        if (a.a != b.a || a.b != b.b) {
            return false;
        }
        unify_stack.clear();
        for (std::uint32_t k = 0; k < a.b; ++k) {
            unify_stack.emplace_back(f1 + 1 + k, f2 + 1 + k);
        }
        while (!unify_stack.empty()) {
            auto [x, y] = unify_stack.back();
            unify_stack.pop_back();
            x = deref(x);
            y = deref(y);
            if (x == y) {
                continue;
            }
            const Cell cx = heap[x];
            const Cell cy = heap[y];
            if (cx.tag == Tag::Ref) {
                if (cy.tag == Tag::Str && occurs(x, y)) {
                    return false;
                }
                bind(x, y);
            } else if (cy.tag == Tag::Ref) {
                if (cx.tag == Tag::Str && occurs(y, x)) {
                    return false;
                }
                bind(y, x);
            } else if (cx.tag == Tag::Con && cy.tag == Tag::Con) {
                if (cx.a != cy.a) {
                    return false;
                }
            } else if (cx.tag == Tag::Str && cy.tag == Tag::Str) {
                const Cell& fx = heap[cx.a];
                const Cell& fy = heap[cy.a];
                if (fx.a != fy.a || fx.b != fy.b) {
                    return false;
                }
                for (std::uint32_t k = 0; k < fx.b; ++k) {
                    unify_stack.emplace_back(cx.a + 1 + k, cy.a + 1 + k);
                }
            } else {
                return false;
            }
        }
        return true;
    }

    std::string render(std::uint32_t i) const {
        i = deref(i);
        const Cell& c = heap[i];
        switch (c.tag) {
        case Tag::Ref:
            return "_H" + std::to_string(i);
        case Tag::Con:
            return symbols[c.a];
        case Tag::Str:
            return render_fun(c.a);
        case Tag::Fun:
            return render_fun(i);
        }
        return "?";
    }

    std::string render_fun(std::uint32_t f) const {
        std::string out = symbols[heap[f].a];
        if (heap[f].b > 0) {
            out += '(';
            for (std::uint32_t k = 0; k < heap[f].b; ++k) {
                if (k != 0) {
                    out += ',';
                }
                out += render(f + 1 + k);
            }
            out += ')';
        }
        return out;
    }

    // --- resolution ----------------------------------------------------------

    bool solve(std::int32_t list, std::size_t steps) {
        if (list < 0) {
            return true;
        }
        if (steps >= bound) {
            cut = true;
            return false;
        }
        const std::uint32_t goal = nodes[static_cast<std::size_t>(list)].fun;
        const std::int32_t rest = nodes[static_cast<std::size_t>(list)].next;
        const Cell g = heap[goal];
        auto it = index.find(pred_key(g.a, g.b));
        if (it == index.end()) {
            return false;
        }
        std::uint32_t goal_first = kNone;
        if (g.b > 0) {
            const std::uint32_t d = deref(goal + 1);
            if (heap[d].tag == Tag::Con) {
                goal_first = heap[d].a;
            }
        }
        // the index vector may grow during push(), never during solve()
        const std::vector<std::uint32_t>& candidates = it->second;
        for (const std::uint32_t cid : candidates) {
            const Template& t = clauses[cid];
            if (goal_first != kNone && t.first_arg_const != kNone && t.first_arg_const != goal_first) {
                continue;
            }
            if (++inferences > limit) {
                abort = true;
                return false;
            }
            const std::size_t heap_mark = heap.size();
            const std::size_t trail_mark = trail.size();
            const std::size_t node_mark = nodes.size();
            ++epoch;
            const std::uint32_t base = instantiate(t);
            if (unify_args(base, goal)) {
                std::int32_t next = rest;
                for (std::size_t k = t.body.size(); k-- > 0;) {
                    nodes.push_back({base + t.body[k], next});
                    next = static_cast<std::int32_t>(nodes.size() - 1);
                }
                if (tracing) {
                    trace.push_back(std::to_string(steps + 1) + ": " + render_fun(goal) + " <- #" +
                                    std::to_string(cid) + " @" + std::to_string(epoch));
                }
                if (solve(next, steps + 1)) {
                    return true;
                }
                if (tracing) {
                    trace.pop_back();
                }
            }
            for (std::size_t k = trail.size(); k-- > trail_mark;) {
                heap[trail[k]].a = trail[k];
            }
            trail.resize(trail_mark);
            heap.resize(heap_mark);
            nodes.resize(node_mark);
            if (abort || (exclusion_only && cut)) {
                return false;
            }
        }
        return false;
    }

    ProofResult run(std::span<const Atom> goals, const ProveOptions& opt) {
        if (opt.depth == 0) {
            throw std::invalid_argument("prover depth must be >= 1");
        }
        ProofResult result;
        inferences = 0;
        limit = opt.inference_limit;
        tracing = opt.trace;
        abort = false;
        epoch = 0;

        // Iterative deepening keeps shallow proofs cheap; the final iteration at
        // the full bound decides the outcome exactly as a single deep search would.
        std::size_t b = std::min<std::size_t>(opt.depth, 8);
        while (true) {
            bound = b;
            cut = false;
            exclusion_only = opt.exclusion_only && b == opt.depth;
            heap.clear();
            trail.clear();
            nodes.clear();
            trace.clear();

            Template query;
            Compiler comp{*this, query.cells, {}};
            std::vector<std::uint32_t> starts;
            for (const auto& g : goals) {
                starts.push_back(comp.structure(g.predicate, g.args));
            }
            query.nvars = static_cast<std::uint32_t>(comp.vars.size());
            const std::uint32_t base = instantiate(query);
            std::int32_t list = -1;
            for (std::size_t k = starts.size(); k-- > 0;) {
                nodes.push_back({base + starts[k], list});
                list = static_cast<std::int32_t>(nodes.size() - 1);
            }

            const bool ok = solve(list, 0);
            result.inferences = inferences;
            if (ok) {
                result.status = ProofStatus::Provable;
                result.trace = std::move(trace);
                return result;
            }
            if (abort) {
                result.status = ProofStatus::DepthExhausted;
                result.limit_hit = true;
                return result;
            }
            if (!cut) {
                result.status = ProofStatus::NotProvable;
                return result;
            }
            if (b == opt.depth) {
                result.status = ProofStatus::DepthExhausted;
                return result;
            }
            b = std::min(opt.depth, b * 2);
        }
    }
};

Prover::Prover(const Program& program) : impl_(std::make_unique<Impl>()) {
    for (const auto& c : program.clauses()) {
        impl_->add(c);
    }
}

Prover::~Prover() = default;
Prover::Prover(Prover&&) noexcept = default;
Prover& Prover::operator=(Prover&&) noexcept = default;

void Prover::push(const Clause& clause) { impl_->add(clause); }

void Prover::pop() {
    if (impl_->clauses.empty()) {
        throw std::logic_error("Prover::pop on empty program");
    }
    auto& ids = impl_->index[impl_->clauses.back().key];
    ids.pop_back();
    impl_->clauses.pop_back();
}

std::size_t Prover::size() const noexcept { return impl_->clauses.size(); }

ProofResult Prover::prove(std::span<const Atom> goals, const ProveOptions& options) {
    return impl_->run(goals, options);
}

ProofStatus Prover::status(const Atom& goal, const ProveOptions& options) {
    return impl_->run(std::span<const Atom>(&goal, 1), options).status;
}

ProofResult prove(const Program& program, std::span<const Atom> goals, std::size_t depth) {
    ProveOptions opt;
    opt.depth = depth;
    return prove(program, goals, opt);
}

ProofResult prove(const Program& program, std::span<const Atom> goals, const ProveOptions& options) {
    Prover p(program);
    return p.prove(goals, options);
}

std::vector<ProofStatus> entails(const Program& program, std::span<const Atom> facts, std::size_t depth) {
    for (const auto& f : facts) {
        if (!f.is_ground()) {
            throw NonGroundExample("example is not ground: " + to_string(f));
        }
    }
    Prover p(program);
    ProveOptions opt;
    opt.depth = depth;
    std::vector<ProofStatus> out;
    out.reserve(facts.size());
    for (const auto& f : facts) {
        out.push_back(p.status(f, opt));
    }
    return out;
}

} // namespace abductor::logic
