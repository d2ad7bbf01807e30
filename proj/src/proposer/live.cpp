#include "abductor/proposer/live.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "abductor/errors.hpp"

namespace abductor::proposer {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    for (auto& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

json parse_json_payload(const std::string& content) {
    const auto block = first_fenced_block(content);
    const std::string text = block ? *block : content;
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        // fall through: tolerate prose around a bare JSON value
    }
    const auto open = text.find_first_of("[{");
    const auto close = text.find_last_of("]}");
    if (open != std::string::npos && close != std::string::npos && close > open) {
        try {
            return json::parse(text.substr(open, close - open + 1));
        } catch (const json::exception&) {
        }
    }
    throw MalformedResponse("no JSON payload in reply");
}

std::vector<std::string> fact_lines(const std::string& block) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (const char c : block) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if ((c == '.' && depth <= 0) || c == '\n') {
            if (auto t = trim(cur); !t.empty()) {
                out.push_back(t);
            }
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (auto t = trim(cur); !t.empty()) {
        out.push_back(t);
    }
    return out;
}

} // namespace

ordered_json EndpointConfig::to_json() const {
    ordered_json j;
    j["base_url"] = base_url;
    j["model"] = model;
    j["token_env"] = token_env;
    j["timeout_ms"] = timeout.count();
    j["max_retries"] = max_retries;
    j["backoff_base_ms"] = backoff_base.count();
    j["max_in_flight"] = max_in_flight;
    j["prompt_dir"] = prompt_dir;
    j["temperature"] = temperature;
    return j;
}

Transport http_transport(const std::string& base_url) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(base_url, m, url_re)) {
        throw std::invalid_argument("base_url must look like http://host[:port][/prefix], got '" + base_url + "'");
    }
    std::string origin = m[1].str();
    std::string prefix = m[2].matched ? m[2].str() : "";
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return [origin, prefix](const HttpRequest& req) {
        HttpResult out;
        httplib::Client cli(origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout).count();
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout).count() % 1000000;
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        for (const auto& [k, v] : req.headers) {
            headers.emplace(k, v);
        }
        auto res = cli.Post(prefix + req.path, headers, req.body, "application/json");
        if (!res) {
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    };
}

std::map<std::string, std::string> load_prompts(const std::string& dir) {
    std::map<std::string, std::string> out;
    std::vector<std::string> names = {"system"};
    for (const auto k : all_request_kinds()) {
        names.emplace_back(to_string(k));
    }
    for (const auto& n : names) {
        const auto path = std::filesystem::path(dir) / (n + ".txt");
        std::ifstream in(path);
        if (!in) {
            throw std::invalid_argument("missing prompt template " + path.string());
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        out[n] = ss.str();
    }
    return out;
}

std::string render_prompt(const std::string& tmpl, const json& payload) {
    std::string out = tmpl;
    auto replace_all = [&](const std::string& from, const std::string& to) {
        std::size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            out.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("{{payload}}", payload.dump(2));
    if (payload.is_object()) {
        for (const auto& [k, v] : payload.items()) {
            if (v.is_string()) {
                replace_all("{{" + k + "}}", v.get<std::string>());
            } else if (v.is_number()) {
                replace_all("{{" + k + "}}", v.dump());
            }
        }
    }
    return out;
}

std::optional<std::string> first_fenced_block(std::string_view text) {
    const auto open = text.find("```");
    if (open == std::string_view::npos) {
        return std::nullopt;
    }
    // skip the info string (e.g. ```prolog)
    const auto body = text.find('\n', open);
    if (body == std::string_view::npos) {
        return std::nullopt;
    }
    const auto close = text.find("```", body + 1);
    if (close == std::string_view::npos) {
        return std::nullopt;
    }
    return std::string(text.substr(body + 1, close - body - 1));
}

std::optional<double> first_unit_number(std::string_view text) {
    static const std::regex num_re(R"((^|[^0-9.])(-?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)))");
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), num_re); it != std::sregex_iterator(); ++it) {
        const double v = std::strtod((*it)[2].str().c_str(), nullptr);
        if (v >= 0.0 && v <= 1.0) {
            return v;
        }
    }
    return std::nullopt;
}

ProposerResponse parse_reply(RequestKind kind, const std::string& content) {
    ProposerResponse r;
    r.kind = kind;
    r.raw_text = content;
    switch (kind) {
    case RequestKind::ProposeCriteria:
    case RequestKind::ResampleTokens: {
        json j = parse_json_payload(content);
        if (j.is_object() && j.contains("criteria")) {
            j = j.at("criteria");
        }
        if (!j.is_array() || j.empty()) {
            throw MalformedResponse("expected a non-empty criteria list");
        }
        for (const auto& c : j) {
            r.criteria.push_back(criterion_from_json(c));
        }
        break;
    }
    case RequestKind::ExtractFacts:
    case RequestKind::ProposeRuleStructures:
    case RequestKind::RegenerateRelations: {
        const auto block = first_fenced_block(content);
        if (!block || trim(*block).empty()) {
            throw MalformedResponse("no fenced clause block in reply");
        }
        (kind == RequestKind::ExtractFacts ? r.facts_text : r.rules_text) = *block;
        break;
    }
    case RequestKind::VerifyFact: {
        static const std::regex word_re("[A-Za-z]+");
        const auto head = content.substr(0, content.find("```"));
        std::optional<Verdict> verdict;
        for (auto it = std::sregex_iterator(head.begin(), head.end(), word_re); it != std::sregex_iterator() && !verdict;
             ++it) {
            const auto w = lower(it->str());
            if (w == "true" || w == "yes") {
                verdict = Verdict::True;
            } else if (w == "false" || w == "no") {
                verdict = Verdict::False;
            } else if (w == "unknown") {
                verdict = Verdict::Unknown;
            }
        }
        if (!verdict) {
            throw MalformedResponse("no verdict in reply");
        }
        r.verdict = *verdict;
        if (r.verdict == Verdict::False) {
            if (const auto block = first_fenced_block(content)) {
                r.replacement = fact_lines(*block);
            }
        }
        break;
    }
    case RequestKind::ScoreRule: {
        r.score = first_unit_number(content);
        if (!r.score) {
            throw MalformedResponse("no number in [0,1] in reply");
        }
        break;
    }
    case RequestKind::ScorePredicates: {
        json j = parse_json_payload(content);
        if (!j.is_object() || j.empty()) {
            throw MalformedResponse("expected a predicate -> score object");
        }
        for (const auto& [k, v] : j.items()) {
            if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) {
                throw MalformedResponse("score of " + k + " outside [0,1]");
            }
            r.scores[k] = v.get<double>();
        }
        break;
    }
    case RequestKind::ExpandRule: {
        r.text = trim(content);
        if (r.text.empty()) {
            throw MalformedResponse("empty expansion");
        }
        break;
    }
    }
    return r;
}

std::string render_reply(const ProposerResponse& r) {
    auto fence = [](const std::string& info, const std::string& body) {
        std::string b = body;
        if (!b.empty() && b.back() != '\n') {
            b += '\n';
        }
        return "```" + info + "\n" + b + "```\n";
    };
    switch (r.kind) {
    case RequestKind::ProposeCriteria:
    case RequestKind::ResampleTokens: {
        json arr = json::array();
        for (const auto& c : r.criteria) {
            arr.push_back(json::parse(to_json(c).dump()));
        }
        return fence("json", arr.dump(2));
    }
    case RequestKind::ExtractFacts: return fence("prolog", r.facts_text);
    case RequestKind::ProposeRuleStructures:
    case RequestKind::RegenerateRelations: return fence("prolog", r.rules_text);
    case RequestKind::VerifyFact: {
        if (r.verdict == Verdict::True) {
            return "true";
        }
        if (r.verdict == Verdict::Unknown) {
            return "unknown";
        }
        std::string body;
        for (const auto& f : r.replacement) {
            body += f + ".\n";
        }
        return r.replacement.empty() ? "false" : "false\n" + fence("prolog", body);
    }
    case RequestKind::ScoreRule: {
        char buf[64];
        const double v = r.score.value_or(0.0);
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
        return std::string(buf, res.ptr);
    }
    case RequestKind::ScorePredicates: return fence("json", json(r.scores).dump());
    case RequestKind::ExpandRule: return r.text;
    }
    return {};
}

LiveProposer::LiveProposer(EndpointConfig cfg, std::map<std::string, std::string> prompts, Transport transport,
                           Sleeper sleeper)
    : cfg_(std::move(cfg)), prompts_(std::move(prompts)), transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (cfg_.max_in_flight == 0) {
        throw std::invalid_argument("max_in_flight must be positive");
    }
    for (const auto k : all_request_kinds()) {
        if (prompts_.find(to_string(k)) == prompts_.end()) {
            throw std::invalid_argument(std::string("no prompt template for ") + to_string(k));
        }
    }
}

std::string LiveProposer::build_body(const ProposerRequest& req) const {
    json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    json messages = json::array();
    if (auto it = prompts_.find("system"); it != prompts_.end()) {
        messages.push_back({{"role", "system"}, {"content", it->second}});
    }
    messages.push_back({{"role", "user"}, {"content", render_prompt(prompts_.at(to_string(req.kind)), req.payload)}});
    body["messages"] = messages;
    return body.dump();
}

ProposerResponse LiveProposer::send(const ProposerRequest& req) {
    validate_payload(req);
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
        ++in_flight_;
    }
    struct Release {
        LiveProposer& self;
        ~Release() {
            {
                std::lock_guard lock(self.mu_);
                --self.in_flight_;
            }
            self.cv_.notify_one();
        }
    } release{*this};

    HttpRequest http;
    http.path = "/chat/completions";
    http.timeout = cfg_.timeout;
    http.body = build_body(req);
    http.headers["Accept"] = "application/json";
    if (const char* token = std::getenv(cfg_.token_env.c_str()); token != nullptr && *token != '\0') {
        http.headers["Authorization"] = std::string("Bearer ") + token;
    }

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleeper_(cfg_.backoff_base * (std::int64_t{1} << (attempt - 1)));
        }
        ++attempts_;
        const HttpResult res = transport_(http);
        if (res.status == 200) {
            std::string content;
            try {
                const auto j = json::parse(res.body);
                content = j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw MalformedResponse(std::string("unexpected chat response shape: ") + e.what());
            }
            return parse_reply(req.kind, content);
        }
        if (res.status == 0) {
            last_error = "transport: " + res.error;
        } else {
            last_error = "HTTP " + std::to_string(res.status);
            if (res.status != 429 && res.status < 500) {
                throw TransportError(std::string(to_string(req.kind)) + " request rejected: " + last_error);
            }
        }
    }
    throw TransportError(std::string(to_string(req.kind)) + " failed after " + std::to_string(cfg_.max_retries + 1) +
                         " attempts: " + last_error);
}

} // namespace abductor::proposer
