#include "abductor/bench/vote.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "abductor/bench/scene.hpp"

namespace abductor::bench {

using logic::Atom;
using logic::Clause;
using logic::Term;

namespace {

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

Term rename(Term t, const std::map<std::string, std::string>& m) {
    if (t.is_variable()) {
        t.name = m.at(t.name);
    }
    for (auto& a : t.args) {
        a = rename(a, m);
    }
    return t;
}

std::string atom_text(const Atom& a, const std::map<std::string, std::string>& m) {
    Atom r{a.predicate, {}};
    for (const auto& t : a.args) {
        r.args.push_back(rename(t, m));
    }
    return logic::to_string(r);
}

std::string clause_key(const Clause& c) {
    std::vector<std::string> vars;
    for (const auto& t : c.head.args) {
        collect_vars(t, vars);
    }
    for (const auto& b : c.body) {
        for (const auto& t : b.args) {
            collect_vars(t, vars);
        }
    }
    std::vector<std::size_t> perm(vars.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::string best;
    bool first = true;
    do {
        std::map<std::string, std::string> m;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            m[vars[i]] = "V" + std::to_string(perm[i]);
        }
        std::vector<std::string> body;
        for (const auto& b : c.body) {
            body.push_back(atom_text(b, m));
        }
        std::sort(body.begin(), body.end());
        std::string k = atom_text(c.head, m);
        for (std::size_t i = 0; i < body.size(); ++i) {
            k += (i == 0 ? " :- " : ", ") + body[i];
        }
        if (first || k < best) {
            best = std::move(k);
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct Job {
    std::string cls;
    std::size_t index = 0;
    std::vector<std::size_t> members;
};

std::vector<Job> plan(const std::map<std::string, std::size_t>& class_sizes, const VoteConfig& cfg) {
    std::vector<Job> jobs;
    for (const auto& [cls, n] : class_sizes) {
        auto groups = form_groups(n, cfg, cls);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            jobs.push_back({cls, g, std::move(groups[g])});
        }
    }
    return jobs;
}

std::map<std::string, VoteResult> collect(const std::vector<Job>& jobs,
                                          const std::vector<std::optional<std::string>>& keys) {
    std::map<std::string, std::vector<std::optional<std::string>>> per_class;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        per_class[jobs[i].cls].push_back(keys[i]);
    }
    std::map<std::string, VoteResult> out;
    for (const auto& [cls, ks] : per_class) {
        out[cls] = tally_votes(ks);
    }
    return out;
}

} // namespace

std::string rule_key(const std::vector<Clause>& clauses) {
    std::vector<std::string> parts;
    for (const auto& c : clauses) {
        parts.push_back(clause_key(c));
    }
    std::sort(parts.begin(), parts.end());
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    std::string out;
    for (const auto& p : parts) {
        out += (out.empty() ? "" : " ") + p + ".";
    }
    return out;
}

std::vector<std::vector<std::size_t>> form_groups(std::size_t n, const VoteConfig& cfg, const std::string& cls) {
    if (cfg.group_size == 0) {
        throw std::invalid_argument("group size must be positive");
    }
    if (n < cfg.group_size) {
        throw std::invalid_argument("class '" + cls + "' has " + std::to_string(n) + " examples, fewer than the group size " +
                                    std::to_string(cfg.group_size));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, "groups:" + cls));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, cfg.sample_size));
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i + cfg.group_size <= idx.size(); i += cfg.group_size) {
        groups.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(i),
                            idx.begin() + static_cast<std::ptrdiff_t>(i + cfg.group_size));
    }
    return groups;
}

VoteResult tally_votes(const std::vector<std::optional<std::string>>& keys) {
    VoteResult r;
    r.groups = keys.size();
    for (const auto& k : keys) {
        if (k) {
            ++r.tally[*k];
        }
    }
    // map order is lexicographic, so a strict > keeps the smallest among ties
    for (const auto& [k, n] : r.tally) {
        if (n > r.votes) {
            r.rule = k;
            r.votes = n;
        }
    }
    return r;
}

std::map<std::string, VoteResult> sample_then_vote(const std::map<std::string, std::size_t>& class_sizes,
                                                   const VoteConfig& cfg, const GroupRunner& run) {
    const auto jobs = plan(class_sizes, cfg);
    std::vector<std::optional<std::string>> keys(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        keys[i] = run(jobs[i].cls, jobs[i].index, jobs[i].members);
    }
    return collect(jobs, keys);
}

std::map<std::string, VoteResult> sample_then_vote_parallel(const std::map<std::string, std::size_t>& class_sizes,
                                                            const VoteConfig& cfg, const GroupRunner& run, int threads) {
    const auto jobs = plan(class_sizes, cfg);
    std::vector<std::optional<std::string>> keys(jobs.size());
    std::exception_ptr error;
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
#else
    (void)threads;
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const auto& j = jobs[static_cast<std::size_t>(i)];
            keys[static_cast<std::size_t>(i)] = run(j.cls, j.index, j.members);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(abductor_vote_error)
#endif
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return collect(jobs, keys);
}

} // namespace abductor::bench
