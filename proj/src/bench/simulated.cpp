#include "abductor/bench/simulated.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/pipeline/pipeline.hpp"

namespace abductor::bench {

using logic::Atom;
using logic::Term;
using proposer::ProposerRequest;
using proposer::ProposerResponse;
using proposer::RequestKind;

SimulatedProposer::SimulatedProposer(const std::vector<Scene>& scenes, SceneRule rule, SimulationConfig cfg)
    : rule_(std::move(rule)), cfg_(cfg) {
    for (const auto& s : scenes) {
        scenes_[s.id] = s;
    }
}

const Scene& SimulatedProposer::scene(const std::string& id) const {
    const auto it = scenes_.find(id);
    if (it == scenes_.end()) {
        throw MalformedResponse("no scene '" + id + "'");
    }
    return it->second;
}

std::map<std::string, InjectionLog> SimulatedProposer::logs() const {
    std::lock_guard lock(mu_);
    return logs_;
}

std::string SimulatedProposer::proposal_text(const std::string& run_id, std::size_t draw) const {
    std::mt19937_64 rng(derive_seed(cfg_.seed, "rules:" + run_id + ":" + std::to_string(draw)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double u_wrong = u(rng);
    const double u_missing = u(rng);
    const double u_extra = u(rng);
    auto body = rule_.clause.body;
    if (u_wrong < cfg_.rule_rates.wrong && !body.empty()) {
        auto& lit = body[rng() % body.size()];
        if (const auto split = split_predicate(lit.predicate)) {
            std::vector<std::string> others;
            for (const auto& v : vocabulary(split->first)) {
                if (v != split->second) {
                    others.push_back(v);
                }
            }
            lit.predicate = fact_predicate(split->first, others[rng() % others.size()]);
        }
    }
    std::vector<std::vector<Atom>> proposals = {body};
    if (u_missing < cfg_.rule_rates.missing && body.size() > 1) {
        auto shorter = body;
        shorter.erase(shorter.begin() + static_cast<std::ptrdiff_t>(rng() % shorter.size()));
        proposals.push_back(std::move(shorter));
    }
    if (u_extra < cfg_.rule_rates.redundant && !body.empty()) {
        // an attribute the chosen object is not yet constrained on
        const auto& var = body[rng() % body.size()].args.at(0);
        std::vector<Attribute> free;
        for (const auto a : kAttributes) {
            const bool used = std::any_of(body.begin(), body.end(), [&](const Atom& l) {
                const auto s = split_predicate(l.predicate);
                return s && s->first == a && l.args.at(0) == var;
            });
            if (!used) {
                free.push_back(a);
            }
        }
        if (!free.empty()) {
            const auto a = free[rng() % free.size()];
            const auto& voc = vocabulary(a);
            auto longer = body;
            longer.push_back(Atom{fact_predicate(a, voc[rng() % voc.size()]), {var}});
            proposals.push_back(std::move(longer));
        }
    }
    std::shuffle(proposals.begin(), proposals.end(), rng);
    std::string out;
    for (const auto& p : proposals) {
        if (!out.empty()) {
            out += "\n";
        }
        out += logic::to_string(logic::Clause{rule_.clause.head, p}) + "\n";
    }
    return out;
}

ProposerResponse SimulatedProposer::send(const ProposerRequest& req) {
    proposer::validate_payload(req);
    ProposerResponse r;
    r.kind = req.kind;
    const auto& p = req.payload;
    switch (req.kind) {
    case RequestKind::ProposeCriteria:
    case RequestKind::ResampleTokens:
        for (const auto a : kAttributes) {
            proposal::Criterion c;
            c.token.name = to_string(a);
            c.token.description = std::string("object ") + to_string(a);
            r.criteria.push_back(c);
        }
        break;
    case RequestKind::ExtractFacts: {
        const auto id = p.at("example").at("id").get<std::string>();
        const auto& s = scene(id);
        const std::string key = req.run_id + "/" + id;
        std::size_t n = 0;
        {
            std::lock_guard lock(mu_);
            n = extractions_[key]++;
        }
        const auto inj =
            inject_hallucinations(scene_to_facts(s), {cfg_.fact_rates, derive_seed(cfg_.seed, "facts:" + key + ":" + std::to_string(n))});
        for (const auto& f : inj.facts.facts) {
            r.facts_text += logic::to_string(f) + ".\n";
        }
        if (r.facts_text.empty()) {
            r.facts_text = "% nothing visible\n";
        }
        std::lock_guard lock(mu_);
        logs_[key] = inj.log;
        break;
    }
    case RequestKind::ProposeRuleStructures:
    case RequestKind::RegenerateRelations: {
        std::size_t n = 0;
        {
            std::lock_guard lock(mu_);
            n = draws_[req.run_id]++;
        }
        r.rules_text = proposal_text(req.run_id, n);
        break;
    }
    case RequestKind::VerifyFact: {
        const auto& s = scene(p.at("example_id").get<std::string>());
        const auto truth = scene_to_facts(s).facts;
        Atom fact;
        try {
            fact = logic::parse_atom(p.at("fact").get<std::string>());
        } catch (const SyntaxError&) {
            r.verdict = proposer::Verdict::Unknown;
            break;
        }
        if (std::find(truth.begin(), truth.end(), fact) != truth.end()) {
            r.verdict = proposer::Verdict::True;
            break;
        }
        r.verdict = proposer::Verdict::False;
        const auto split = fact.args.size() == 1 ? split_predicate(fact.predicate) : std::nullopt;
        if (split) {
            for (const auto& o : s.objects) {
                if (fact.args[0] == Term::constant(o.id)) {
                    r.replacement.push_back(fact_predicate(split->first, o.get(split->first)) + "(" + o.id + ")");
                }
            }
        }
        break;
    }
    case RequestKind::ScoreRule: {
        const auto& s = scene(p.at("example_id").get<std::string>());
        std::vector<logic::Clause> clauses;
        try {
            clauses = logic::parse_program(p.at("rule").get<std::string>()).clauses();
        } catch (const SyntaxError& e) {
            throw MalformedResponse(std::string("unreadable rule: ") + e.what());
        }
        const std::set<std::string> unary(attribute_predicates().begin(), attribute_predicates().end());
        std::vector<logic::Clause> scoped;
        std::string target = "target";
        for (const auto& c : clauses) {
            target = c.head.predicate;
            scoped.push_back(pipeline::scope_clause(c, unary, target));
        }
        r.score = satisfies_scoped(s, scoped, target) ? 1.0 : 0.0;
        break;
    }
    case RequestKind::ScorePredicates: {
        std::set<std::string> in_rule;
        for (const auto& l : rule_.clause.body) {
            in_rule.insert(l.predicate);
        }
        for (const auto& name : p.at("predicates")) {
            const auto n = name.get<std::string>();
            if (in_rule.count(n) != 0) {
                r.scores[n] = 0.9;
            } else {
                r.scores[n] = static_cast<double>(derive_seed(cfg_.seed, "relevance:" + n) % 801) / 1000.0;
            }
        }
        break;
    }
    case RequestKind::ExpandRule: r.text = p.at("natural_text").get<std::string>(); break;
    }
    return r;
}

} // namespace abductor::bench
