#include "simforge/agents/state_change.hpp"

#include <set>

#include "simforge/errors.hpp"

namespace simforge::agents {

void check_state_change(const core::SessionModel& session, const StateChangePayload& payload) {
    if (payload.relevant_variable_names.empty() && payload.new_variables.empty()) {
        throw InvalidArtifact("state change selects no existing variable and declares no new one");
    }
    for (const auto& name : payload.relevant_variable_names) {
        if (session.find_variable(name) == nullptr) {
            throw InvalidArtifact("relevant variable '" + name + "' does not exist");
        }
    }
    std::set<std::string> seen;
    for (const auto& var : payload.new_variables) {
        if (!core::is_identifier(var.name)) throw InvalidArtifact("new variable name '" + var.name + "' is not an identifier");
        if (session.find_variable(var.name) != nullptr) {
            throw InvalidArtifact("new variable '" + var.name + "' already exists");
        }
        if (!seen.insert(var.name).second) throw InvalidArtifact("new variable '" + var.name + "' declared twice");
        if (!core::literal_matches(var.value, var.type)) {
            throw InvalidArtifact("new variable '" + var.name + "' value '" + var.value + "' is not a valid " +
                                  std::string(core::to_string(var.type)) + " literal");
        }
    }
}

StateChangeResult run_state_change(const core::SessionModel& session, const std::string& instruction, int step_index,
                                   const TrioSettings& settings, llm::Backend& backend,
                                   const prompts::PromptRegistry& registry) {
    TrioInput input;
    input.kind = scoring::ComponentKind::StateChange;
    input.step_index = step_index;
    input.instruction = instruction;
    input.context = core::render_state_manager(session.state_variables);

    StateChangeResult result;
    result.trace = run_trio(input, settings, backend, registry);
    const auto& payload = std::get<StateChangePayload>(result.trace.checkpoint.artifact.payload);
    check_state_change(session, payload);

    result.relevant = payload.relevant_variable_names;
    result.new_variables = payload.new_variables;
    result.session = core::with_variables(session, payload.new_variables);
    std::set<std::string> selected(payload.relevant_variable_names.begin(), payload.relevant_variable_names.end());
    for (const auto& v : payload.new_variables) selected.insert(v.name);
    result.scope = core::scope_for(result.session, selected);
    return result;
}

}  // namespace simforge::agents
