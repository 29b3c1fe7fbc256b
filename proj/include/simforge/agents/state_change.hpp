#pragma once

#include <string>
#include <vector>

#include "simforge/agents/trio.hpp"
#include "simforge/core/model.hpp"

namespace simforge::agents {

struct StateChangeResult {
    /// The step's scope over `session` (new variables included).
    core::ScopeSet scope;
    std::vector<std::string> relevant;
    std::vector<core::StateVariable> new_variables;
    /// Input session with the new variables integrated.
    core::SessionModel session;
    RefinementTrace trace;
};

/// Runs the state-change trio over the full state manager and integrates
/// its checkpoint. Throws InvalidArtifact when the accepted selection names
/// an unknown variable, declares an invalid or clashing variable, or is empty.
StateChangeResult run_state_change(const core::SessionModel& session, const std::string& instruction, int step_index,
                                   const TrioSettings& settings, llm::Backend& backend,
                                   const prompts::PromptRegistry& registry);

/// Checks a state-change selection against `session` (same errors as above).
void check_state_change(const core::SessionModel& session, const StateChangePayload& payload);

}  // namespace simforge::agents
