#pragma once

#include <nlohmann/json.hpp>

#include "simforge/core/model.hpp"

namespace simforge::core {

nlohmann::json to_json(const StateVariable& var);
nlohmann::json to_json(const FunctionArtifact& fn);
nlohmann::json to_json(const SessionModel& session);

/// Throws InvalidModel on a malformed document.
StateVariable state_variable_from_json(const nlohmann::json& doc);
FunctionArtifact function_from_json(const nlohmann::json& doc);
SessionModel session_from_json(const nlohmann::json& doc);

}  // namespace simforge::core
