#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "abductor/proposal/facts.hpp"

namespace abductor::proposer {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class RequestKind {
    ProposeCriteria,
    ExtractFacts,
    ProposeRuleStructures,
    VerifyFact,
    ScoreRule,
    ScorePredicates,
    RegenerateRelations,
    ResampleTokens,
    ExpandRule,
};

const char* to_string(RequestKind k) noexcept;
RequestKind parse_request_kind(std::string_view s);
const std::vector<RequestKind>& all_request_kinds();

/// Payload fields each kind requires:
///   propose_criteria        target, examples[{id,label,descriptor}]
///   extract_facts           example{id,label,descriptor}, tokens[]
///   propose_rule_structures target, tokens[], facts[{id,label,facts}]
///   verify_fact             example_id, descriptor, fact
///   score_rule              rule, example_id, descriptor
///   score_predicates        predicates[], examples[]
///   regenerate_relations    target, kept[], dropped[], facts[]
///   resample_tokens         target, previous[], examples[]
///   expand_rule             rule, natural_text
struct ProposerRequest {
    RequestKind kind = RequestKind::ProposeCriteria;
    std::string run_id;
    std::uint64_t seq = 0;
    json payload = json::object();
};

/// Throws std::invalid_argument when a required payload field is missing.
void validate_payload(const ProposerRequest& req);

enum class Verdict { True, False, Unknown };
const char* to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view s);

/// Only the fields matching `kind` are meaningful.
struct ProposerResponse {
    RequestKind kind = RequestKind::ProposeCriteria;
    std::vector<proposal::Criterion> criteria;
    std::string facts_text;
    std::string rules_text;
    Verdict verdict = Verdict::Unknown;
    std::vector<std::string> replacement;
    std::optional<double> score;
    std::map<std::string, double> scores;
    std::string text;
    std::string raw_text;

    friend bool operator==(const ProposerResponse&, const ProposerResponse&) = default;
};

ordered_json to_json(const proposal::Criterion& c);
proposal::Criterion criterion_from_json(const json& j);

/// Kind-specific fields only, plus raw_text.
ordered_json to_json(const ProposerResponse& r);
/// Throws MalformedResponse on missing fields or scores outside [0,1].
ProposerResponse response_from_json(RequestKind kind, const json& j);

class Proposer {
public:
    virtual ~Proposer() = default;
    virtual ProposerResponse send(const ProposerRequest& req) = 0;
};

/// One exchange as journaled.
struct Exchange {
    ProposerRequest request;
    ProposerResponse response;
    std::int64_t ts_ms = 0;
    std::int64_t latency_ms = 0;
    std::string error;
};

ordered_json to_json(const Exchange& e);
Exchange exchange_from_json(const json& j);

/// Append-only exchange log; thread-safe. With a path, each exchange is also
/// appended to that file as one JSON line.
class Journal {
public:
    Journal() = default;
    explicit Journal(std::string path);

    void append(Exchange e);
    std::vector<Exchange> exchanges() const;
    ordered_json to_json() const;

private:
    mutable std::mutex mu_;
    std::vector<Exchange> log_;
    std::string path_;
};

/// Forwards to `inner` and journals every exchange, including failed ones.
class JournalingProposer : public Proposer {
public:
    JournalingProposer(Proposer& inner, Journal& journal) : inner_(inner), journal_(journal) {}
    ProposerResponse send(const ProposerRequest& req) override;

private:
    Proposer& inner_;
    Journal& journal_;
};

enum class ExhaustionPolicy { Error, RepeatLast };

/// Scripted responses. Lookup order for a request: per-run sequence recorded
/// from a transcript, then keyed entries, then the per-kind sequence, then the
/// per-kind default. Keys: extract_facts uses the example id; verify_fact
/// tries "<example_id>:<fact>" then "<fact>"; score_rule tries
/// "<rule>|<example_id>", then "<rule>", then "*|<example_id>".
struct Fixture {
    struct KindScript {
        std::map<std::string, json> keyed;
        std::vector<json> sequence;
        std::optional<json> fallback;
    };

    ExhaustionPolicy policy = ExhaustionPolicy::Error;
    std::map<RequestKind, KindScript> scripts;
    std::map<std::string, std::map<RequestKind, std::vector<json>>> runs;

    static Fixture from_json(const json& j);
    static Fixture load(const std::string& path);
    /// Replay fixture: every exchange becomes the next entry of its run's
    /// per-kind sequence, raw_text included.
    static Fixture from_transcript(const std::vector<Exchange>& exchanges);
    ordered_json to_json() const;
};

class ScriptedProposer : public Proposer {
public:
    explicit ScriptedProposer(Fixture fixture) : fixture_(std::move(fixture)) {}
    ProposerResponse send(const ProposerRequest& req) override;

private:
    Fixture fixture_;
    std::mutex mu_;
    std::map<std::pair<std::string, RequestKind>, std::size_t> cursor_;
};

/// Candidate lookup keys for a request, most specific first.
std::vector<std::string> fixture_keys(const ProposerRequest& req);

} // namespace abductor::proposer
