#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "simforge/llm/backend.hpp"
#include "simforge/scoring/scoring.hpp"

namespace simforge::llm {

/// JSON-schema document for a structured output. These documents are both
/// published (`simforge schemas`) and used for validation.
nlohmann::json json_schema(const SchemaId& id);

/// Every schema the engine can request.
std::vector<SchemaId> all_schemas();

/// First reason `doc` fails `id`, or nullopt when it conforms.
std::optional<std::string> schema_error(const SchemaId& id, const nlohmann::json& doc);

/// Builds a Critique from a document already checked against the critique schema.
scoring::Critique critique_from_json(scoring::ComponentKind kind, const nlohmann::json& doc);
nlohmann::json to_json(const scoring::Critique& critique);

}  // namespace simforge::llm
