#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "abductor/pipeline/pipeline.hpp"
#include "abductor/proposer/live.hpp"

namespace abductor::cli {

using ordered_json = nlohmann::ordered_json;

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kNoHypothesis = 3,
    kTimeout = 4,
    kReflectionExhausted = 5,
    kTransport = 6,
};

using EnvLookup = std::function<const char*(const char*)>;

/// Flat settings: defaults <- config file <- flags <- ABDUCTOR_<KEY> env vars.
/// Values are kept as JSON scalars; env and flag values arrive as strings and
/// are converted when read.
class CliConfig {
public:
    CliConfig();

    /// Known keys in declaration order.
    static const std::vector<std::string>& keys();

    /// Flat JSON object; unknown keys and non-scalar values throw std::invalid_argument.
    void merge_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void merge_env(const EnvLookup& env);

    const ordered_json& values() const noexcept { return values_; }

    pipeline::PipelineConfig pipeline() const;
    proposer::EndpointConfig endpoint() const;
    int jobs() const;

private:
    ordered_json values_;
};

/// "10s", "500ms", "2m" or a bare number of seconds.
std::chrono::milliseconds parse_duration(const std::string& text);

/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Entry point behind the `abductor` binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env = {});

} // namespace abductor::cli
