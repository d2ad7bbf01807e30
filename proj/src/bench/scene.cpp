#include "abductor/bench/scene.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/logic/prover.hpp"
#include "abductor/pipeline/pipeline.hpp"

namespace abductor::bench {

using logic::Atom;
using logic::Clause;
using logic::Term;

const char* to_string(Attribute a) noexcept {
    switch (a) {
    case Attribute::Shape: return "shape";
    case Attribute::Size: return "size";
    case Attribute::Color: return "color";
    case Attribute::Material: return "material";
    }
    return "?";
}

const std::vector<std::string>& vocabulary(Attribute a) {
    static const std::vector<std::string> shapes = {"cube", "sphere", "cylinder"};
    static const std::vector<std::string> sizes = {"small", "large"};
    static const std::vector<std::string> colors = {"grey", "red", "blue", "green", "brown", "purple", "cyan", "yellow"};
    static const std::vector<std::string> materials = {"rubber", "metal"};
    switch (a) {
    case Attribute::Shape: return shapes;
    case Attribute::Size: return sizes;
    case Attribute::Color: return colors;
    case Attribute::Material: return materials;
    }
    return shapes;
}

std::string fact_predicate(Attribute a, std::string_view value) { return std::string(to_string(a)) + "_" + std::string(value); }

std::optional<std::pair<Attribute, std::string>> split_predicate(std::string_view predicate) {
    for (const auto a : kAttributes) {
        const std::string prefix = std::string(to_string(a)) + "_";
        if (predicate.substr(0, prefix.size()) == prefix) {
            std::string value(predicate.substr(prefix.size()));
            const auto& v = vocabulary(a);
            if (std::find(v.begin(), v.end(), value) != v.end()) {
                return std::make_pair(a, value);
            }
        }
    }
    return std::nullopt;
}

const std::vector<std::string>& attribute_predicates() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> out;
        for (const auto a : kAttributes) {
            for (const auto& v : vocabulary(a)) {
                out.push_back(fact_predicate(a, v));
            }
        }
        return out;
    }();
    return all;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    // FNV-1a over the tag, then a splitmix64 finalizer.
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (const unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

const std::vector<SceneRule>& clevr_hans_rules() {
    static const std::vector<SceneRule> rules = {
        {"grey_sphere_red_cube",
         logic::parse_clause("target(X) :- color_grey(X), shape_sphere(X), color_red(Y), shape_cube(Y).")},
        {"large_cylinder_metal_cube",
         logic::parse_clause("target(X) :- size_large(X), shape_cylinder(X), material_metal(Y), shape_cube(Y).")},
        {"blue_sphere_small_yellow",
         logic::parse_clause("target(X) :- color_blue(X), shape_sphere(X), size_small(Y), color_yellow(Y).")},
    };
    return rules;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::string other_value(Attribute a, const std::string& not_this, std::mt19937_64& rng) {
    std::vector<std::string> opts;
    for (const auto& v : vocabulary(a)) {
        if (v != not_this) {
            opts.push_back(v);
        }
    }
    return pick(opts, rng);
}

Object random_object(std::mt19937_64& rng) {
    Object o;
    for (const auto a : kAttributes) {
        o.set(a, pick(vocabulary(a), rng));
    }
    return o;
}

struct Condition {
    std::size_t var = 0;
    Attribute attr = Attribute::Shape;
    std::string value;
};

struct ParsedRule {
    std::vector<std::string> vars;
    std::vector<Condition> conditions;
};

ParsedRule parse_rule(const SceneRule& rule) {
    ParsedRule out;
    for (const auto& lit : rule.clause.body) {
        const auto split = split_predicate(lit.predicate);
        if (!split || lit.args.size() != 1 || !lit.args[0].is_variable()) {
            throw UnsatisfiableRule("rule " + rule.name + ": '" + logic::to_string(lit) +
                                    "' is not an attribute condition on an object variable");
        }
        const auto& name = lit.args[0].name;
        auto it = std::find(out.vars.begin(), out.vars.end(), name);
        if (it == out.vars.end()) {
            out.vars.push_back(name);
            it = out.vars.end() - 1;
        }
        out.conditions.push_back({static_cast<std::size_t>(it - out.vars.begin()), split->first, split->second});
    }
    if (out.conditions.empty()) {
        throw UnsatisfiableRule("rule " + rule.name + " has no conditions");
    }
    return out;
}

Scene assemble(std::vector<Object> objects, const std::string& id, proposal::Label label, const std::string& rule_name,
               std::mt19937_64& rng) {
    std::shuffle(objects.begin(), objects.end(), rng);
    Scene s;
    s.id = id;
    s.label = label;
    s.rule_name = rule_name;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        objects[i].id = "o" + std::to_string(i + 1);
    }
    s.objects = std::move(objects);
    return s;
}

} // namespace

SceneRule random_rule(std::size_t n_literals, std::uint64_t seed, std::string name) {
    if (n_literals == 0 || n_literals > 2 * kAttributes.size()) {
        throw std::invalid_argument("random_rule: literal count must lie in [1, 8]");
    }
    std::mt19937_64 rng(seed);
    const std::size_t nx = (n_literals + 1) / 2;
    const std::size_t ny = n_literals - nx;
    std::vector<Attribute> ax(kAttributes.begin(), kAttributes.end());
    std::shuffle(ax.begin(), ax.end(), rng);
    ax.resize(nx);
    Clause c;
    c.head = Atom{"target", {Term::variable("X")}};
    std::map<Attribute, std::string> xvals;
    for (const auto a : ax) {
        xvals[a] = pick(vocabulary(a), rng);
        c.body.push_back(Atom{fact_predicate(a, xvals[a]), {Term::variable("X")}});
    }
    if (ny > 0) {
        // Y differs from X on a shared attribute, so one object never satisfies both.
        std::vector<Attribute> ay = {ax[0]};
        std::vector<Attribute> rest;
        for (const auto a : kAttributes) {
            if (a != ax[0]) {
                rest.push_back(a);
            }
        }
        std::shuffle(rest.begin(), rest.end(), rng);
        ay.insert(ay.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(ny - 1));
        for (const auto a : ay) {
            const auto v = a == ax[0] ? other_value(a, xvals[a], rng) : pick(vocabulary(a), rng);
            c.body.push_back(Atom{fact_predicate(a, v), {Term::variable("Y")}});
        }
    }
    return {std::move(name), std::move(c)};
}

proposal::FactSet scene_to_facts(const Scene& s) {
    proposal::FactSet fs;
    fs.example_id = s.id;
    fs.label = s.label;
    for (const auto& o : s.objects) {
        for (const auto a : kAttributes) {
            fs.facts.push_back(Atom{fact_predicate(a, o.get(a)), {Term::constant(o.id)}});
        }
    }
    return fs;
}

std::string describe(const Scene& s) {
    std::string out;
    for (const auto& o : s.objects) {
        if (!out.empty()) {
            out += "; ";
        }
        out += o.id + ": " + o.get(Attribute::Size) + " " + o.get(Attribute::Color) + " " + o.get(Attribute::Material) +
               " " + o.get(Attribute::Shape);
    }
    return out.empty() ? "empty scene" : out;
}

nlohmann::ordered_json to_json(const Scene& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["label"] = proposal::to_string(s.label);
    j["rule"] = s.rule_name;
    j["objects"] = nlohmann::ordered_json::array();
    for (const auto& o : s.objects) {
        nlohmann::ordered_json oj;
        oj["id"] = o.id;
        for (const auto a : kAttributes) {
            oj[to_string(a)] = o.get(a);
        }
        j["objects"].push_back(oj);
    }
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    try {
        s.id = j.at("id").get<std::string>();
        s.label = proposal::parse_label(j.at("label").get<std::string>());
        s.rule_name = j.value("rule", "");
        for (const auto& oj : j.at("objects")) {
            Object o;
            o.id = oj.at("id").get<std::string>();
            for (const auto a : kAttributes) {
                const auto v = oj.at(to_string(a)).get<std::string>();
                const auto& voc = vocabulary(a);
                if (std::find(voc.begin(), voc.end(), v) == voc.end()) {
                    throw std::invalid_argument(std::string("unknown ") + to_string(a) + " '" + v + "'");
                }
                o.set(a, v);
            }
            s.objects.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad scene document: ") + e.what());
    }
    return s;
}

bool satisfies_scoped(const Scene& s, const std::vector<Clause>& scoped_rule, const std::string& target) {
    pipeline::ExampleFacts ex;
    ex.example.id = s.id;
    ex.facts = scene_to_facts(s).facts;
    auto bg = pipeline::scoped_background(ex, false);
    for (const auto& c : scoped_rule) {
        bg.add(c);
    }
    const Atom goal{target, {Term::constant(s.id)}};
    return logic::prove(bg, std::span<const Atom>(&goal, 1)).status == logic::ProofStatus::Provable;
}

bool satisfies(const Scene& s, const Clause& rule) {
    const std::set<std::string> unary(attribute_predicates().begin(), attribute_predicates().end());
    return satisfies_scoped(s, {pipeline::scope_clause(rule, unary, "target")}, "target");
}

Scene random_scene(const std::string& id, std::size_t n_objects, std::mt19937_64& rng) {
    std::vector<Object> objs;
    for (std::size_t i = 0; i < n_objects; ++i) {
        objs.push_back(random_object(rng));
    }
    return assemble(std::move(objs), id, proposal::Label::Positive, "", rng);
}

std::vector<Scene> gen_scenes(const SceneRule& rule, std::size_t n_pos, std::size_t n_neg, std::uint64_t seed,
                              const std::string& id_prefix, const SceneGenConfig& cfg) {
    if (cfg.min_distractors > cfg.max_distractors) {
        throw std::invalid_argument("min_distractors exceeds max_distractors");
    }
    const auto parsed = parse_rule(rule);
    std::mt19937_64 rng(seed);
    const std::set<std::string> unary(attribute_predicates().begin(), attribute_predicates().end());
    const Clause scoped = pipeline::scope_clause(rule.clause, unary, "target");

    auto base_objects = [&] {
        std::vector<Object> objs;
        for (std::size_t v = 0; v < parsed.vars.size(); ++v) {
            objs.push_back(random_object(rng));
        }
        for (const auto& c : parsed.conditions) {
            objs[c.var].set(c.attr, c.value);
        }
        const auto k = std::uniform_int_distribution<std::size_t>(cfg.min_distractors, cfg.max_distractors)(rng);
        for (std::size_t i = 0; i < k; ++i) {
            objs.push_back(random_object(rng));
        }
        return objs;
    };

    std::vector<Scene> out;
    const std::size_t n = parsed.conditions.size();
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
        const bool positive = i < n_pos;
        const std::size_t k = i - n_pos;
        const std::string id = id_prefix + std::to_string(i + 1);
        bool done = false;
        for (std::size_t attempt = 0; attempt < cfg.max_attempts && !done; ++attempt) {
            auto objs = base_objects();
            if (!positive) {
                std::vector<std::size_t> chosen;
                if (k < n) {
                    chosen.push_back(k);
                } else {
                    while (chosen.empty()) {
                        for (std::size_t c = 0; c < n; ++c) {
                            if (std::bernoulli_distribution(0.5)(rng)) {
                                chosen.push_back(c);
                            }
                        }
                    }
                }
                for (const auto c : chosen) {
                    const auto& cond = parsed.conditions[c];
                    objs[cond.var].set(cond.attr, other_value(cond.attr, cond.value, rng));
                }
            }
            auto s = assemble(std::move(objs), id, positive ? proposal::Label::Positive : proposal::Label::Negative,
                              rule.name, rng);
            if (satisfies_scoped(s, {scoped}) == positive) {
                out.push_back(std::move(s));
                done = true;
            }
        }
        if (!done) {
            throw UnsatisfiableRule("no " + std::string(positive ? "positive" : "negative") + " scene for rule " +
                                    rule.name + " after " + std::to_string(cfg.max_attempts) + " attempts");
        }
    }
    return out;
}

} // namespace abductor::bench
