#pragma once

#include <chrono>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simforge::validator {

inline constexpr int kDefaultFrames = 300;

struct SanityReport {
    bool compiled = false;
    int ran_frames = 0;
    bool crashed = false;
    std::optional<std::string> crash_message;
    std::chrono::milliseconds wall_time{0};
    int requested_frames = kDefaultFrames;

    /// Compiled, did not crash, and survived every requested frame.
    bool ok() const { return compiled && !crashed && ran_frames >= requested_frames; }

    bool operator==(const SanityReport&) const = default;
};

/// wall_time is omitted so serialized reports stay deterministic.
nlohmann::json to_json(const SanityReport& report);

/// Parses one harness result document. Throws HarnessProtocolError when the
/// document is malformed or breaks the report invariants.
SanityReport parse_harness_document(std::string_view text, int frames);

/// Anything that can sanity-check assembled code.
class SanityChecker {
public:
    virtual ~SanityChecker() = default;
    virtual SanityReport check(const std::string& code, int frames, std::chrono::milliseconds timeout) = 0;
};

struct HarnessConfig {
    /// Program and leading arguments; `--file <path> --frames N` is appended.
    std::vector<std::string> command;
    /// Parent of the per-check scratch directories (default: system temp).
    std::filesystem::path scratch_root;
    /// Extra time granted after SIGKILL for the child to be reaped.
    std::chrono::milliseconds grace{2000};
};

/// Splits a shell-like command line on whitespace (no quoting rules).
std::vector<std::string> split_command(std::string_view command_line);

/// Runs the external harness in a fresh scratch directory, one child
/// process per check. Safe to call concurrently.
class HarnessValidator : public SanityChecker {
public:
    explicit HarnessValidator(HarnessConfig config);

    /// Throws ConfigError when frames < 1, HarnessUnavailable when the
    /// harness cannot be started, HarnessProtocolError on unusable output.
    /// A run past `timeout` is killed and reported crashed with "timeout".
    SanityReport check(const std::string& code, int frames, std::chrono::milliseconds timeout) override;

private:
    HarnessConfig config_;
};

/// One finished run, as fed to metrics_rollup.
struct RunOutcome {
    SanityReport report;
    /// Checkpoint critique total of every trio in the run.
    std::vector<int> checkpoint_totals;
};

struct RunMetrics {
    double compilation_rate = 0.0;
    double runtime_success_rate = 0.0;
    /// Absent when no run recorded a trio.
    std::optional<double> mean_trio_score;
};

/// Throws ConfigError on an empty run set.
RunMetrics metrics_rollup(std::span<const RunOutcome> runs);

}  // namespace simforge::validator
