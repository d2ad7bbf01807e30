#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "abductor/bench/inject.hpp"
#include "abductor/bench/scene.hpp"
#include "abductor/proposer/proposer.hpp"

namespace abductor::bench {

struct SimulationConfig {
    /// Perception noise applied to every extraction.
    InjectionRates fact_rates{};
    /// Proposal noise: wrong = one condition gets a wrong value; missing / redundant =
    /// an extra proposal with one condition removed / added.
    InjectionRates rule_rates{};
    std::uint64_t seed = 0;
};

/// Stand-in for the MLLM over synthetic scenes. Extraction is the scene's
/// complete fact set passed through the injector (fresh draw per extraction);
/// verify_fact and score_rule answer from the true scene; proposals are
/// the ground-truth rule perturbed at `rule_rates`. Thread-safe.
class SimulatedProposer : public proposer::Proposer {
public:
    SimulatedProposer(const std::vector<Scene>& scenes, SceneRule rule, SimulationConfig cfg);

    proposer::ProposerResponse send(const proposer::ProposerRequest& req) override;

    /// Injection log of the most recent extraction per (run, example), keyed "run/example".
    std::map<std::string, InjectionLog> logs() const;
    /// Proposal text for one draw, blocks separated by blank lines.
    std::string proposal_text(const std::string& run_id, std::size_t draw) const;

private:
    const Scene& scene(const std::string& id) const;

    std::map<std::string, Scene> scenes_;
    SceneRule rule_;
    SimulationConfig cfg_;
    mutable std::mutex mu_;
    std::map<std::string, std::size_t> extractions_;
    std::map<std::string, InjectionLog> logs_;
    std::map<std::string, std::size_t> draws_;
};

} // namespace abductor::bench
