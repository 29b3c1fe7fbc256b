#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "simforge/core/model.hpp"
#include "simforge/scoring/scoring.hpp"

namespace simforge::agents {

struct StateChangePayload {
    std::vector<std::string> relevant_variable_names;
    std::vector<core::StateVariable> new_variables;

    bool operator==(const StateChangePayload&) const = default;
};

struct SlotSpec {
    std::string name;
    std::string description;

    bool operator==(const SlotSpec&) const = default;
};

/// At most one sub-function per MVC slot, at least one slot filled.
struct StepDecomposition {
    std::optional<SlotSpec> input_logic;
    std::optional<SlotSpec> state_transition;
    std::optional<SlotSpec> ui_rendering;

    bool operator==(const StepDecomposition&) const = default;
};

struct FunctionPayload {
    std::string function_name;
    std::string description;
    std::string implementation;
    std::vector<std::string> relevant_state;

    bool operator==(const FunctionPayload&) const = default;
};

using ArtifactPayload = std::variant<StateChangePayload, StepDecomposition, FunctionPayload>;

struct DesignerArtifact {
    scoring::ComponentKind kind = scoring::ComponentKind::StateChange;
    ArtifactPayload payload;

    bool operator==(const DesignerArtifact&) const = default;
};

/// Parses a designer reply. Throws InvalidArtifact when `doc` does not
/// match the designer schema for `kind`.
DesignerArtifact artifact_from_json(scoring::ComponentKind kind, const nlohmann::json& doc);
nlohmann::json to_json(const DesignerArtifact& artifact);

/// Component kinds that produce a function, and the function role each maps to.
bool is_function_kind(scoring::ComponentKind kind);
core::FunctionKind function_kind_for(scoring::ComponentKind kind);

core::FunctionArtifact to_function(const DesignerArtifact& artifact);

}  // namespace simforge::agents
