#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "simforge/agents/artifacts.hpp"
#include "simforge/llm/backend.hpp"
#include "simforge/prompts/registry.hpp"
#include "simforge/scoring/scoring.hpp"

namespace simforge::agents {

struct TrioSettings {
    int tau = 8;
    int n_max = 3;
    double designer_temperature = 0.2;
    double planner_temperature = 0.2;
    double critic_temperature = 0.0;
    llm::RetryPolicy retry;
};

/// What one trio works on. `context` is everything the designer and critic
/// may see about the game (the scoped state manager and overlapping
/// functions); `task` names the sub-function for MVC trios.
struct TrioInput {
    scoring::ComponentKind kind = scoring::ComponentKind::StateChange;
    int step_index = 0;
    std::string instruction;
    std::string context;
    std::string task;
};

struct TrioRound {
    DesignerArtifact artifact;
    scoring::Critique critique;
    scoring::PlannerDecision decision = scoring::PlannerDecision::Refine;
    /// True when this round's artifact replaced the checkpoint.
    bool became_checkpoint = false;
    /// Instruction the planner gave for the next revision, if one followed.
    std::string planner_instruction;
    /// True when the next revision was based on the checkpoint rather than this round.
    bool reverted_to_checkpoint = false;
};

struct Checkpoint {
    DesignerArtifact artifact;
    scoring::Critique critique;
    int round = 0;
};

struct RefinementTrace {
    scoring::ComponentKind kind = scoring::ComponentKind::StateChange;
    std::vector<TrioRound> rounds;
    Checkpoint checkpoint;
    /// Checkpoint total after each round; non-decreasing by construction.
    std::vector<int> checkpoint_totals;
    /// Whether any round met the threshold (the loop then stopped).
    bool accepted = false;
    int rounds_used = 0;
    llm::Usage usage;
    /// Per-agent conversations: {"designer": [...], "critic": [...], "planner": [...]}.
    nlohmann::json transcripts = nlohmann::json::object();
};

/// The planner's tools over one trio. Each tool delegates to the designer or
/// critic backend and appends to the trace; calls out of order throw
/// ToolOrderViolation.
///
/// Round r is designer output r plus its critique. After every critique the
/// decision is planner_policy over the critiques so far, and the checkpoint
/// moves to the new round unless its total fell below the checkpoint's.
class TrioTools {
public:
    TrioTools(TrioInput input, TrioSettings settings, llm::Backend& backend, const prompts::PromptRegistry& registry);

    const DesignerArtifact& request_initial_design();
    const scoring::Critique& request_critique();
    const DesignerArtifact& request_design_change(const std::string& instruction);
    /// Makes the checkpoint artifact the base of the next revision.
    const DesignerArtifact& reset_to_previous_checkpoint();

    /// Asks the planner agent for the next revision instruction. The planner
    /// explains the revision; it does not choose accept/rollback.
    std::string consult_planner();

    bool awaiting_critique() const { return pending_.has_value(); }
    int rounds_used() const { return static_cast<int>(trace_.rounds.size()); }
    bool can_revise() const;
    std::optional<scoring::PlannerDecision> last_decision() const;
    bool latest_is_checkpoint() const;

    const RefinementTrace& trace() const { return trace_; }
    RefinementTrace finish() &&;

    static std::vector<llm::ToolDeclaration> tool_declarations();

private:
    llm::ChatResponse call(llm::ChatRequest request, std::string_view agent);
    std::string role_prompt(prompts::AgentRole role) const;
    llm::RequestKey key(std::string_view agent, int round) const;
    std::string designer_brief() const;
    std::string critic_brief(const DesignerArtifact& artifact, int round) const;

    TrioInput input_;
    TrioSettings settings_;
    llm::Backend& backend_;
    const prompts::PromptRegistry& registry_;

    RefinementTrace trace_;
    std::optional<DesignerArtifact> pending_;
    std::optional<DesignerArtifact> base_;
    std::vector<llm::Message> designer_log_;
    std::vector<llm::Message> critic_log_;
    std::vector<llm::Message> planner_log_;
};

/// One planner, designer and critic refinement loop: initial design and critique,
/// then up to n_max revisions, stopping as soon as a round is accepted.
/// Returns the trace whose checkpoint is the best-scoring artifact.
/// Throws DesignFailure / CritiqueFailure when output stays off-schema after
/// the re-ask; other backend errors propagate.
RefinementTrace run_trio(const TrioInput& input, const TrioSettings& settings, llm::Backend& backend,
                         const prompts::PromptRegistry& registry);

}  // namespace simforge::agents
