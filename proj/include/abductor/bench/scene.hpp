#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "abductor/logic/term.hpp"
#include "abductor/proposal/facts.hpp"

namespace abductor::bench {

enum class Attribute { Shape, Size, Color, Material };
inline constexpr std::array<Attribute, 4> kAttributes = {Attribute::Shape, Attribute::Size, Attribute::Color,
                                                         Attribute::Material};

const char* to_string(Attribute a) noexcept;
const std::vector<std::string>& vocabulary(Attribute a);

/// "color" + "grey" -> "color_grey".
std::string fact_predicate(Attribute a, std::string_view value);
/// Inverse of fact_predicate; nullopt for anything outside the vocabulary.
std::optional<std::pair<Attribute, std::string>> split_predicate(std::string_view predicate);
/// Every attribute predicate, in vocabulary order.
const std::vector<std::string>& attribute_predicates();

struct Object {
    std::string id;
    /// indexed by Attribute
    std::array<std::string, 4> attrs;

    const std::string& get(Attribute a) const { return attrs[static_cast<std::size_t>(a)]; }
    void set(Attribute a, std::string v) { attrs[static_cast<std::size_t>(a)] = std::move(v); }
    friend bool operator==(const Object&, const Object&) = default;
};

struct Scene {
    std::string id;
    std::vector<Object> objects;
    proposal::Label label = proposal::Label::Positive;
    std::string rule_name;
    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Ground-truth rule: an object-level clause over attribute predicates,
/// read existentially ("some X is a grey sphere and some Y is a red cube").
struct SceneRule {
    std::string name;
    logic::Clause clause;
};

/// The three class rules used by the clevr-synth and voting suites.
const std::vector<SceneRule>& clevr_hans_rules();

/// Random rule with `n_literals` conditions spread over two objects, each
/// attribute constrained at most once per object.
SceneRule random_rule(std::size_t n_literals, std::uint64_t seed, std::string name = "rule");

/// One atom per (object, attribute) pair, object order then attribute order.
proposal::FactSet scene_to_facts(const Scene& s);
/// Short text used as the example descriptor, e.g. "o1: large grey metal sphere; o2: ...".
std::string describe(const Scene& s);

nlohmann::ordered_json to_json(const Scene& s);
/// Throws std::invalid_argument on a malformed document or an off-vocabulary value.
Scene scene_from_json(const nlohmann::json& j);

/// Whether the scene's complete facts entail the rule.
bool satisfies(const Scene& s, const logic::Clause& rule);
/// Same test for an already scene-scoped rule (head target(S)).
bool satisfies_scoped(const Scene& s, const std::vector<logic::Clause>& scoped_rule, const std::string& target = "target");

struct SceneGenConfig {
    std::size_t min_distractors = 1;
    std::size_t max_distractors = 2;
    /// Attempts per scene before UnsatisfiableRule.
    std::size_t max_attempts = 200;
};

/// Positives satisfy `rule`; negative k inverts condition k mod |body| and,
/// past the first |body| negatives, a random nonempty subset instead. Every
/// scene is checked with the prover. Ids are prefix + index. Throws
/// UnsatisfiableRule when no valid scene is found within the attempt budget.
std::vector<Scene> gen_scenes(const SceneRule& rule, std::size_t n_pos, std::size_t n_neg, std::uint64_t seed,
                              const std::string& id_prefix = "s", const SceneGenConfig& cfg = {});

/// Scene with uniformly random objects, label unset.
Scene random_scene(const std::string& id, std::size_t n_objects, std::mt19937_64& rng);

/// Deterministic child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

} // namespace abductor::bench
