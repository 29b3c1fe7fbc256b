#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "simforge/core/model.hpp"
#include "simforge/llm/scripted_backend.hpp"
#include "simforge/pipeline/report.hpp"
#include "simforge/prompts/registry.hpp"
#include "simforge/scoring/scoring.hpp"
#include "simforge/validator/validator.hpp"

namespace simforge::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture_dir();
std::filesystem::path prompts_dir();
std::filesystem::path stub_harness();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

const prompts::PromptRegistry& shipped_registry();

/// Directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Builds scripted scenarios one agent reply at a time.
class ScenarioBuilder {
public:
    ScenarioBuilder& designer(scoring::ComponentKind kind, int step, int round, const nlohmann::json& content,
                              llm::Usage usage = {40, 15});
    ScenarioBuilder& critic(scoring::ComponentKind kind, int step, int round, const std::vector<int>& scores,
                            const std::string& feedback = "Looks reasonable.",
                            const std::vector<std::string>& suggestions = {}, llm::Usage usage = {30, 10});
    ScenarioBuilder& planner(scoring::ComponentKind kind, int step, int round, const std::string& instruction,
                             llm::Usage usage = {20, 8});
    ScenarioBuilder& raw(const std::string& role, int step, int round, const std::string& content,
                         llm::Usage usage = {});
    ScenarioBuilder& decomposer(const std::vector<std::string>& steps, int attempt = 0, llm::Usage usage = {60, 20});
    ScenarioBuilder& failure(const std::string& role, int step, int round, llm::ScriptedFailure failure);

    /// One trio that accepts its first design with `scores`.
    ScenarioBuilder& accept_trio(scoring::ComponentKind kind, int step, const nlohmann::json& design,
                                 const std::vector<int>& scores);

    llm::ScriptedScenario build(bool strict = true) const;

private:
    llm::ScriptedScenario scenario_;
};

/// Critique JSON for `kind` with `scores` in rubric order.
nlohmann::json critique_json(scoring::ComponentKind kind, const std::vector<int>& scores,
                             const std::string& feedback = "Looks reasonable.",
                             const std::vector<std::string>& suggestions = {});

nlohmann::json state_change_json(const std::vector<std::string>& relevant,
                                 const std::vector<core::StateVariable>& new_variables);
nlohmann::json decompose_json(const std::optional<std::string>& input_logic,
                              const std::optional<std::string>& state_transition,
                              const std::optional<std::string>& ui_rendering);
nlohmann::json function_json(const std::string& name, const std::string& code,
                             const std::vector<std::string>& relevant_state, const std::string& description = "");

/// A valid Python literal of `type`, drawn from `rng`.
std::string random_literal(std::mt19937& rng, core::ValueType type);

/// Valid session with `variables` random variables after the four initial
/// ones and `functions` functions, each touching a random subset of variables.
core::SessionModel random_session(std::mt19937& rng, int variables, int functions);

/// Session and scope whose scoped context is 150 whitespace tokens of a
/// 600-token full context (hand counted: header 4, each `self.vN = 0`
/// line 3, `def f(state):` 2, `def g(state, surface):` 3, each body line 3).
struct RatioFixture {
    core::SessionModel session;
    core::ScopeSet scope;
};
RatioFixture quarter_ratio_fixture();

/// Window 640x480 at 30 fps, three extra variables and functions of every
/// kind declared in mixed order.
core::SessionModel assembler_fixture_session();

/// Sanity checker answering from a queue; the last report repeats.
class FakeChecker : public validator::SanityChecker {
public:
    FakeChecker() = default;
    explicit FakeChecker(std::vector<validator::SanityReport> reports) : reports_(std::move(reports)) {}

    validator::SanityReport check(const std::string& code, int frames, std::chrono::milliseconds timeout) override;

    static validator::SanityReport passing(int frames = validator::kDefaultFrames);
    static validator::SanityReport crashing(int at_frame, int frames = validator::kDefaultFrames);

    std::vector<std::string> checked_code;
    bool unavailable = false;

private:
    std::vector<validator::SanityReport> reports_;
};

/// The two-step scripted catcher run and its specification.
llm::ScriptedScenario catcher_scenario();
std::string catcher_spec();

/// Sum of every scripted usage in `scenario`.
llm::Usage scenario_usage(const llm::ScriptedScenario& scenario);

/// Designer and critic requests of the scoped trios that mention a state
/// variable outside their step's scope, as "role step round: name" lines.
/// The universe is every variable of `final_session` or any step's scope.
std::vector<std::string> context_leaks(const std::vector<llm::ChatRequest>& requests,
                                       const pipeline::RunReport& report, const core::SessionModel& final_session);

}  // namespace simforge::testing
