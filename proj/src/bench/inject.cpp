#include "abductor/bench/inject.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include "abductor/bench/scene.hpp"

namespace abductor::bench {

using logic::Atom;

namespace {

void check_rate(double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " rate must lie in [0,1]");
    }
}

// Values of the fact's attribute that would not collide with any input fact
// about the same object.
std::vector<std::string> free_values(const Atom& fact, Attribute a, const std::set<Atom>& input) {
    std::vector<std::string> out;
    for (const auto& v : vocabulary(a)) {
        Atom cand{fact_predicate(a, v), fact.args};
        if (input.count(cand) == 0) {
            out.push_back(v);
        }
    }
    return out;
}

} // namespace

Injected inject_hallucinations(const proposal::FactSet& fs, const InjectionConfig& cfg) {
    check_rate(cfg.rates.missing, "missing");
    check_rate(cfg.rates.redundant, "redundant");
    check_rate(cfg.rates.wrong, "wrong");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::set<Atom> input(fs.facts.begin(), fs.facts.end());

    Injected out;
    out.facts.example_id = fs.example_id;
    out.facts.label = fs.label;
    out.log.total = fs.facts.size();
    std::vector<Atom> spurious;
    for (const auto& f : fs.facts) {
        const double u_drop = u(rng);
        const double u_wrong = u(rng);
        const double u_extra = u(rng);
        const auto split = f.args.size() == 1 ? split_predicate(f.predicate) : std::nullopt;
        std::vector<std::string> free;
        if (split) {
            free = free_values(f, split->first, input);
        }
        if (u_drop < cfg.rates.missing) {
            out.log.dropped.push_back(f);
        } else if (u_wrong < cfg.rates.wrong && !free.empty()) {
            Atom bad{fact_predicate(split->first, free[rng() % free.size()]), f.args};
            out.log.mutated.push_back({f, bad});
            out.facts.facts.push_back(std::move(bad));
        } else {
            out.facts.facts.push_back(f);
        }
        if (u_extra < cfg.rates.redundant && !free.empty()) {
            Atom extra{fact_predicate(split->first, free[rng() % free.size()]), f.args};
            out.log.spurious.push_back(extra);
            spurious.push_back(std::move(extra));
        }
    }
    for (auto& s : spurious) {
        out.facts.facts.push_back(std::move(s));
    }
    // A spurious value may coincide with a mutated one; keep the set semantics.
    std::set<Atom> seen;
    std::vector<Atom> unique;
    for (auto& f : out.facts.facts) {
        if (seen.insert(f).second) {
            unique.push_back(std::move(f));
        }
    }
    out.facts.facts = std::move(unique);
    return out;
}

proposal::FactSet invert(const proposal::FactSet& corrupted, const InjectionLog& log) {
    std::set<Atom> s(corrupted.facts.begin(), corrupted.facts.end());
    for (const auto& m : log.mutated) {
        s.erase(m.corrupted);
    }
    for (const auto& a : log.spurious) {
        s.erase(a);
    }
    for (const auto& m : log.mutated) {
        s.insert(m.original);
    }
    for (const auto& a : log.dropped) {
        s.insert(a);
    }
    proposal::FactSet out;
    out.example_id = corrupted.example_id;
    out.label = corrupted.label;
    out.facts.assign(s.begin(), s.end());
    return out;
}

Rectification rectification_report(const InjectionLog& log, const std::vector<Atom>& final_facts) {
    const std::set<Atom> fin(final_facts.begin(), final_facts.end());
    Rectification r;
    for (const auto& a : log.dropped) {
        ++r.missing.events;
        r.missing.rectified += fin.count(a);
    }
    for (const auto& a : log.spurious) {
        ++r.redundant.events;
        r.redundant.rectified += fin.count(a) == 0 ? 1 : 0;
    }
    for (const auto& m : log.mutated) {
        ++r.wrong.events;
        r.wrong.rectified += fin.count(m.original);
    }
    return r;
}

std::string format_rectification_table(const RectificationTable& t) {
    std::string out = "row\tmissing\tredundant\twrong\n";
    auto cell = [](const RateCount& c) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f (%zu)", c.rate(), c.events);
        return std::string(buf);
    };
    for (const auto& [row, r] : t) {
        out += row + "\t" + cell(r.missing) + "\t" + cell(r.redundant) + "\t" + cell(r.wrong) + "\n";
    }
    return out;
}

} // namespace abductor::bench
