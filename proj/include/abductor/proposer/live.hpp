#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "abductor/proposer/proposer.hpp"

namespace abductor::proposer {

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8080/v1";
    std::string model = "qwen-7b";
    /// Name of the environment variable holding the bearer token.
    std::string token_env = "ABDUCTOR_API_KEY";
    std::chrono::milliseconds timeout{60000};
    std::size_t max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::size_t max_in_flight = 4;
    std::string prompt_dir = "prompts/v1";
    double temperature = 0.0;

    /// Never contains the token itself.
    ordered_json to_json() const;
};

struct HttpRequest {
    std::string path;
    std::map<std::string, std::string> headers;
    std::string body;
    std::chrono::milliseconds timeout{0};
};

/// status 0 means the request never got an HTTP answer.
struct HttpResult {
    int status = 0;
    std::string body;
    std::string error;
};

using Transport = std::function<HttpResult(const HttpRequest&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// cpp-httplib transport for `base_url` (scheme://host[:port][/prefix]).
Transport http_transport(const std::string& base_url);

/// Kind-name -> template text, plus "system". Loaded from `<dir>/<kind>.txt`.
std::map<std::string, std::string> load_prompts(const std::string& dir);

/// Substitutes {{payload}} with the pretty-printed payload and {{field}} with
/// each top-level string or number field.
std::string render_prompt(const std::string& tmpl, const json& payload);

/// Content of the first ``` fenced block, if any.
std::optional<std::string> first_fenced_block(std::string_view text);
/// First number in the text that lies in [0,1].
std::optional<double> first_unit_number(std::string_view text);
/// Turns model text into a response for `kind`; throws MalformedResponse.
ProposerResponse parse_reply(RequestKind kind, const std::string& content);
/// Model-style text that parse_reply reads back to `r` (raw_text aside).
std::string render_reply(const ProposerResponse& r);

/// Chat-completions client. Attempts per request <= 1 + max_retries, with
/// backoff base * 2^k before retry k. Retries on transport failures, 429 and
/// 5xx; other statuses fail at once.
class LiveProposer : public Proposer {
public:
    LiveProposer(EndpointConfig cfg, std::map<std::string, std::string> prompts, Transport transport,
                 Sleeper sleeper = {});
    ProposerResponse send(const ProposerRequest& req) override;

    std::size_t attempts() const noexcept { return attempts_.load(); }

private:
    std::string build_body(const ProposerRequest& req) const;

    EndpointConfig cfg_;
    std::map<std::string, std::string> prompts_;
    Transport transport_;
    Sleeper sleeper_;
    std::atomic<std::size_t> attempts_{0};
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
};

} // namespace abductor::proposer
