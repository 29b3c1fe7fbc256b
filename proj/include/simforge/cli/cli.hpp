#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace simforge::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,       // bad flags/config, IO, unknown session, harness unavailable
    kExitStepFailure = 2,  // a step exhausted its retries (partial report written)
    kExitStopped = 3,      // --stop-after reached; continue with `resume`
};

/// Environment variables the CLI consults (injected for tests).
struct Environment {
    std::map<std::string, std::string> vars;

    static Environment from_process();
    std::optional<std::string> get(const std::string& name) const;
};

inline constexpr const char* kApiKeyEnv = "OPENAI_API_KEY";
inline constexpr const char* kBaseUrlEnv = "OPENAI_BASE_URL";

/// Runs one CLI invocation; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const Environment& env);

}  // namespace simforge::cli
