#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simforge/agents/trio.hpp"
#include "simforge/core/model.hpp"
#include "simforge/llm/backend.hpp"
#include "simforge/pipeline/report.hpp"
#include "simforge/prompts/registry.hpp"
#include "simforge/store/session_store.hpp"
#include "simforge/validator/validator.hpp"

namespace simforge::pipeline {

struct GameSpec {
    std::string title;
    std::string text;

    /// Title is the file stem. Throws ConfigError if unreadable or blank.
    static GameSpec from_file(const std::filesystem::path& path);
    void validate() const;
};

struct StepPlan {
    std::vector<std::string> steps;

    void validate() const;
};

struct RunConfig {
    int tau = 8;
    int n_max = 3;
    int max_retries = 3;
    int max_steps = 12;
    /// Extra decomposition requests after an unusable plan.
    int decompose_reasks = 2;
    int frames = validator::kDefaultFrames;
    std::chrono::milliseconds timeout{30000};
    double designer_temperature = 0.2;
    double planner_temperature = 0.2;
    double critic_temperature = 0.0;
    core::InitialDimensions dims;
    llm::RetryPolicy retry;
    core::TokenCounter token_counter = core::whitespace_token_count;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;
    agents::TrioSettings trio_settings() const;
};

struct StepOutcome {
    core::SessionModel session;
    StepReport report;
};

struct RunResult {
    core::SessionModel session;
    std::string code;
    RunReport report;
};

/// Metadata keys a pipeline session carries.
namespace meta {
inline constexpr const char* kTitle = "title";
inline constexpr const char* kSpec = "spec";
inline constexpr const char* kPlan = "plan";
inline constexpr const char* kStepIndex = "current_query_index";
inline constexpr const char* kTokensIn = "tokens.input";
inline constexpr const char* kTokensOut = "tokens.output";
inline constexpr const char* kDecomposition = "report.decomposition";
inline constexpr const char* kStatus = "status";
std::string step_report_key(int step_index);
}  // namespace meta

/// Drives a whole run against one store and backend. Single-threaded.
class Pipeline {
public:
    Pipeline(RunConfig config, llm::Backend& backend, const prompts::PromptRegistry& registry,
             store::SessionStore& store, validator::SanityChecker& checker);

    /// Splits the specification into steps. Re-asks while the plan is unusable,
    /// then throws DecompositionFailure.
    StepPlan decompose_spec(const GameSpec& spec);

    /// Executes step `step_index` (1-based) on `session` and persists it under
    /// `session_id`. Every attempt starts from the pre-step snapshot; after
    /// max_retries failures the store holds the pre-step session again and
    /// StepFailure is thrown (failed_step() then describes the step).
    /// `last` marks the run complete on success.
    StepOutcome run_step(const std::string& session_id, const core::SessionModel& session,
                         const std::string& instruction, int step_index, bool last = false);

    /// New session, decomposition, then every step. Stops once `stop_after`
    /// steps are committed. Throws ConfigError when the session already exists.
    RunResult run(const GameSpec& spec, const std::string& session_id, std::optional<int> stop_after = {});

    /// Continues a stored run from its first uncommitted step; a finished run
    /// is returned unchanged.
    RunResult resume(const std::string& session_id, std::optional<int> stop_after = {});

    /// Report of the committed steps of a stored run, without running anything.
    static RunReport stored_report(const std::string& session_id, const core::SessionModel& session);

    const std::optional<StepReport>& failed_step() const { return failed_step_; }
    const llm::Usage& usage() const;

private:
    RunResult continue_run(const std::string& session_id, core::SessionModel session, std::optional<int> stop_after);

    RunConfig config_;
    llm::Backend& backend_;
    const prompts::PromptRegistry& registry_;
    store::SessionStore& store_;
    validator::SanityChecker& checker_;

    struct Meter;
    std::shared_ptr<Meter> meter_;
    std::optional<StepReport> failed_step_;
};

}  // namespace simforge::pipeline
