#include "abductor/proposer/proposer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "abductor/errors.hpp"

namespace abductor::proposer {

namespace {

struct KindName {
    RequestKind kind;
    const char* name;
};

constexpr KindName kKinds[] = {
    {RequestKind::ProposeCriteria, "propose_criteria"},
    {RequestKind::ExtractFacts, "extract_facts"},
    {RequestKind::ProposeRuleStructures, "propose_rule_structures"},
    {RequestKind::VerifyFact, "verify_fact"},
    {RequestKind::ScoreRule, "score_rule"},
    {RequestKind::ScorePredicates, "score_predicates"},
    {RequestKind::RegenerateRelations, "regenerate_relations"},
    {RequestKind::ResampleTokens, "resample_tokens"},
    {RequestKind::ExpandRule, "expand_rule"},
};

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

double unit_score(const json& v, const std::string& what) {
    if (!v.is_number()) {
        throw MalformedResponse(what + " is not a number");
    }
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) {
        throw MalformedResponse(what + " outside [0,1]: " + v.dump());
    }
    return d;
}

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) {
        throw MalformedResponse(std::string("response lacks field '") + name + "'");
    }
    return j.at(name);
}

std::string payload_str(const json& p, const char* key) {
    if (p.contains(key) && p.at(key).is_string()) {
        return p.at(key).get<std::string>();
    }
    return {};
}

} // namespace

const char* to_string(RequestKind k) noexcept {
    for (const auto& e : kKinds) {
        if (e.kind == k) {
            return e.name;
        }
    }
    return "propose_criteria";
}

RequestKind parse_request_kind(std::string_view s) {
    for (const auto& e : kKinds) {
        if (s == e.name) {
            return e.kind;
        }
    }
    throw std::invalid_argument("unknown request kind '" + std::string(s) + "'");
}

const std::vector<RequestKind>& all_request_kinds() {
    static const std::vector<RequestKind> kinds = [] {
        std::vector<RequestKind> out;
        for (const auto& e : kKinds) {
            out.push_back(e.kind);
        }
        return out;
    }();
    return kinds;
}

void validate_payload(const ProposerRequest& req) {
    std::vector<const char*> need;
    switch (req.kind) {
    case RequestKind::ProposeCriteria: need = {"target", "examples"}; break;
    case RequestKind::ExtractFacts: need = {"example", "tokens"}; break;
    case RequestKind::ProposeRuleStructures: need = {"target", "tokens", "facts"}; break;
    case RequestKind::VerifyFact: need = {"example_id", "descriptor", "fact"}; break;
    case RequestKind::ScoreRule: need = {"rule", "example_id", "descriptor"}; break;
    case RequestKind::ScorePredicates: need = {"predicates", "examples"}; break;
    case RequestKind::RegenerateRelations: need = {"target", "kept", "dropped", "facts"}; break;
    case RequestKind::ResampleTokens: need = {"target", "previous", "examples"}; break;
    case RequestKind::ExpandRule: need = {"rule", "natural_text"}; break;
    }
    if (!req.payload.is_object()) {
        throw std::invalid_argument(std::string(to_string(req.kind)) + " payload must be an object");
    }
    for (const char* k : need) {
        if (!req.payload.contains(k)) {
            throw std::invalid_argument(std::string(to_string(req.kind)) + " payload lacks '" + k + "'");
        }
    }
    if (req.kind == RequestKind::ExtractFacts && !req.payload.at("example").contains("id")) {
        throw std::invalid_argument("extract_facts payload example lacks 'id'");
    }
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

Verdict parse_verdict(std::string_view s) {
    if (s == "true") {
        return Verdict::True;
    }
    if (s == "false") {
        return Verdict::False;
    }
    if (s == "unknown") {
        return Verdict::Unknown;
    }
    throw MalformedResponse("unknown verdict '" + std::string(s) + "'");
}

ordered_json to_json(const proposal::Criterion& c) {
    ordered_json j;
    j["token"] = c.token.name;
    j["kind"] = proposal::to_string(c.token.kind);
    j["description"] = c.token.description;
    j["conditions"] = c.conditions;
    j["state_dependence"] = proposal::to_string(c.state_dependence);
    return j;
}

proposal::Criterion criterion_from_json(const json& j) {
    proposal::Criterion c;
    try {
        c.token.name = j.at("token").get<std::string>();
        c.token.kind = proposal::parse_token_kind(j.value("kind", "attribute"));
        c.token.description = j.value("description", "");
        c.conditions = j.value("conditions", std::vector<std::string>{});
        const std::string sd = j.value("state_dependence", "single-state");
        if (sd == "single-state") {
            c.state_dependence = proposal::StateDependence::SingleState;
        } else if (sd == "transformation") {
            c.state_dependence = proposal::StateDependence::Transformation;
        } else {
            throw std::invalid_argument("unknown state_dependence '" + sd + "'");
        }
    } catch (const MalformedResponse&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedResponse(std::string("bad criterion: ") + e.what());
    }
    return c;
}

ordered_json to_json(const ProposerResponse& r) {
    ordered_json j = ordered_json::object();
    switch (r.kind) {
    case RequestKind::ProposeCriteria:
    case RequestKind::ResampleTokens: {
        j["criteria"] = ordered_json::array();
        for (const auto& c : r.criteria) {
            j["criteria"].push_back(to_json(c));
        }
        break;
    }
    case RequestKind::ExtractFacts: j["facts"] = r.facts_text; break;
    case RequestKind::ProposeRuleStructures:
    case RequestKind::RegenerateRelations: j["rules"] = r.rules_text; break;
    case RequestKind::VerifyFact:
        j["verdict"] = to_string(r.verdict);
        j["replacement"] = r.replacement;
        break;
    case RequestKind::ScoreRule: j["score"] = r.score.value_or(0.0); break;
    case RequestKind::ScorePredicates: j["scores"] = r.scores; break;
    case RequestKind::ExpandRule: j["text"] = r.text; break;
    }
    j["raw_text"] = r.raw_text;
    return j;
}

ProposerResponse response_from_json(RequestKind kind, const json& j) {
    ProposerResponse r;
    r.kind = kind;
    try {
        switch (kind) {
        case RequestKind::ProposeCriteria:
        case RequestKind::ResampleTokens:
            for (const auto& c : field(j, "criteria")) {
                r.criteria.push_back(criterion_from_json(c));
            }
            break;
        case RequestKind::ExtractFacts: r.facts_text = field(j, "facts").get<std::string>(); break;
        case RequestKind::ProposeRuleStructures:
        case RequestKind::RegenerateRelations: r.rules_text = field(j, "rules").get<std::string>(); break;
        case RequestKind::VerifyFact:
            r.verdict = parse_verdict(field(j, "verdict").get<std::string>());
            r.replacement = j.value("replacement", std::vector<std::string>{});
            break;
        case RequestKind::ScoreRule: r.score = unit_score(field(j, "score"), "score"); break;
        case RequestKind::ScorePredicates:
            for (const auto& [k, v] : field(j, "scores").items()) {
                r.scores[k] = unit_score(v, "score of " + k);
            }
            break;
        case RequestKind::ExpandRule: r.text = field(j, "text").get<std::string>(); break;
        }
    } catch (const MalformedResponse&) {
        throw;
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("bad ") + to_string(kind) + " response: " + e.what());
    }
    r.raw_text = j.value("raw_text", "");
    return r;
}

ordered_json to_json(const Exchange& e) {
    ordered_json j;
    j["run_id"] = e.request.run_id;
    j["seq"] = e.request.seq;
    j["kind"] = to_string(e.request.kind);
    j["payload"] = e.request.payload;
    j["response"] = to_json(e.response);
    if (!e.error.empty()) {
        j["error"] = e.error;
    }
    j["ts_ms"] = e.ts_ms;
    j["latency_ms"] = e.latency_ms;
    return j;
}

Exchange exchange_from_json(const json& j) {
    Exchange e;
    e.request.run_id = j.at("run_id").get<std::string>();
    e.request.seq = j.at("seq").get<std::uint64_t>();
    e.request.kind = parse_request_kind(j.at("kind").get<std::string>());
    e.request.payload = j.at("payload");
    e.error = j.value("error", "");
    if (e.error.empty()) {
        e.response = response_from_json(e.request.kind, j.at("response"));
    } else {
        e.response.kind = e.request.kind;
    }
    e.ts_ms = j.value("ts_ms", std::int64_t{0});
    e.latency_ms = j.value("latency_ms", std::int64_t{0});
    return e;
}

Journal::Journal(std::string path) : path_(std::move(path)) {}

void Journal::append(Exchange e) {
    std::lock_guard lock(mu_);
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        out << proposer::to_json(e).dump() << '\n';
    }
    log_.push_back(std::move(e));
}

std::vector<Exchange> Journal::exchanges() const {
    std::lock_guard lock(mu_);
    return log_;
}

ordered_json Journal::to_json() const {
    std::lock_guard lock(mu_);
    ordered_json out = ordered_json::array();
    for (const auto& e : log_) {
        out.push_back(proposer::to_json(e));
    }
    return out;
}

ProposerResponse JournalingProposer::send(const ProposerRequest& req) {
    Exchange e;
    e.request = req;
    e.ts_ms = now_ms();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        e.response = inner_.send(req);
    } catch (const std::exception& ex) {
        e.response.kind = req.kind;
        e.error = ex.what();
        e.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        journal_.append(std::move(e));
        throw;
    }
    e.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    ProposerResponse out = e.response;
    journal_.append(std::move(e));
    return out;
}

std::vector<std::string> fixture_keys(const ProposerRequest& req) {
    const auto& p = req.payload;
    switch (req.kind) {
    case RequestKind::ExtractFacts:
        if (p.contains("example") && p.at("example").contains("id")) {
            return {p.at("example").at("id").get<std::string>()};
        }
        return {};
    case RequestKind::VerifyFact: {
        const auto fact = payload_str(p, "fact");
        return {payload_str(p, "example_id") + ":" + fact, fact};
    }
    case RequestKind::ScoreRule: {
        const auto rule = payload_str(p, "rule");
        return {rule + "|" + payload_str(p, "example_id"), rule, "*|" + payload_str(p, "example_id")};
    }
    default: return {};
    }
}

Fixture Fixture::from_json(const json& j) {
    Fixture f;
    const std::string policy = j.value("policy", "error");
    if (policy == "error") {
        f.policy = ExhaustionPolicy::Error;
    } else if (policy == "repeat-last") {
        f.policy = ExhaustionPolicy::RepeatLast;
    } else {
        throw std::invalid_argument("unknown fixture policy '" + policy + "'");
    }
    if (j.contains("responses")) {
        for (const auto& [name, spec] : j.at("responses").items()) {
            KindScript s;
            if (spec.is_array()) {
                s.sequence = spec.get<std::vector<json>>();
            } else if (spec.is_object()) {
                if (spec.contains("keyed")) {
                    for (const auto& [k, v] : spec.at("keyed").items()) {
                        s.keyed[k] = v;
                    }
                }
                if (spec.contains("sequence")) {
                    s.sequence = spec.at("sequence").get<std::vector<json>>();
                }
                if (spec.contains("default")) {
                    s.fallback = spec.at("default");
                }
            } else {
                throw std::invalid_argument("fixture entry for " + name + " must be an array or object");
            }
            f.scripts[parse_request_kind(name)] = std::move(s);
        }
    }
    if (j.contains("runs")) {
        for (const auto& [run, kinds] : j.at("runs").items()) {
            for (const auto& [name, seq] : kinds.items()) {
                f.runs[run][parse_request_kind(name)] = seq.get<std::vector<json>>();
            }
        }
    }
    // Validate every scripted response up front.
    for (const auto& [kind, s] : f.scripts) {
        for (const auto& [k, v] : s.keyed) {
            response_from_json(kind, v);
        }
        for (const auto& v : s.sequence) {
            response_from_json(kind, v);
        }
        if (s.fallback) {
            response_from_json(kind, *s.fallback);
        }
    }
    return f;
}

Fixture Fixture::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read fixture " + path);
    }
    return from_json(json::parse(in));
}

Fixture Fixture::from_transcript(const std::vector<Exchange>& exchanges) {
    Fixture f;
    std::vector<const Exchange*> order;
    for (const auto& e : exchanges) {
        if (e.error.empty()) {
            order.push_back(&e);
        }
    }
    std::stable_sort(order.begin(), order.end(), [](const Exchange* a, const Exchange* b) {
        return std::tie(a->request.run_id, a->request.seq) < std::tie(b->request.run_id, b->request.seq);
    });
    for (const auto* e : order) {
        f.runs[e->request.run_id][e->request.kind].push_back(proposer::to_json(e->response));
    }
    return f;
}

ordered_json Fixture::to_json() const {
    ordered_json j;
    j["policy"] = policy == ExhaustionPolicy::Error ? "error" : "repeat-last";
    ordered_json responses = ordered_json::object();
    for (const auto& [kind, s] : scripts) {
        ordered_json e = ordered_json::object();
        if (!s.keyed.empty()) {
            e["keyed"] = s.keyed;
        }
        if (!s.sequence.empty()) {
            e["sequence"] = s.sequence;
        }
        if (s.fallback) {
            e["default"] = *s.fallback;
        }
        responses[to_string(kind)] = e;
    }
    j["responses"] = responses;
    ordered_json runs_j = ordered_json::object();
    for (const auto& [run, kinds] : runs) {
        ordered_json k = ordered_json::object();
        for (const auto& [kind, seq] : kinds) {
            k[to_string(kind)] = seq;
        }
        runs_j[run] = k;
    }
    j["runs"] = runs_j;
    return j;
}

ProposerResponse ScriptedProposer::send(const ProposerRequest& req) {
    validate_payload(req);
    const std::string kind_name = to_string(req.kind);
    auto make = [&](const json& j, const std::string& id) {
        ProposerResponse r = response_from_json(req.kind, j);
        if (!j.contains("raw_text")) {
            r.raw_text = "fixture:" + kind_name + ":" + id;
        }
        return r;
    };
    std::lock_guard lock(mu_);
    auto& cursor = cursor_[{req.run_id, req.kind}];
    auto from_sequence = [&](const std::vector<json>& seq, bool& exhausted) -> std::optional<ProposerResponse> {
        if (cursor < seq.size()) {
            const auto i = cursor++;
            return make(seq[i], "#" + std::to_string(i));
        }
        exhausted = !seq.empty() || exhausted;
        if (fixture_.policy == ExhaustionPolicy::RepeatLast && !seq.empty()) {
            return make(seq.back(), "#" + std::to_string(seq.size() - 1));
        }
        return std::nullopt;
    };
    bool exhausted = false;
    if (auto run = fixture_.runs.find(req.run_id); run != fixture_.runs.end()) {
        if (auto seq = run->second.find(req.kind); seq != run->second.end()) {
            if (auto r = from_sequence(seq->second, exhausted)) {
                return *r;
            }
            throw FixtureExhausted("fixture exhausted for " + kind_name + " in run " + req.run_id + " at seq " +
                                   std::to_string(req.seq));
        }
    }
    if (auto it = fixture_.scripts.find(req.kind); it != fixture_.scripts.end()) {
        const auto& s = it->second;
        for (const auto& key : fixture_keys(req)) {
            if (auto k = s.keyed.find(key); k != s.keyed.end()) {
                return make(k->second, key);
            }
        }
        if (auto r = from_sequence(s.sequence, exhausted)) {
            return *r;
        }
        if (s.fallback) {
            return make(*s.fallback, "default");
        }
    }
    throw FixtureExhausted(std::string(exhausted ? "fixture exhausted" : "no fixture entry") + " for " + kind_name +
                           " (run " + req.run_id + ", seq " + std::to_string(req.seq) + ")");
}

} // namespace abductor::proposer
