#include "simforge/agents/artifacts.hpp"

#include "simforge/errors.hpp"
#include "simforge/llm/schemas.hpp"

namespace simforge::agents {

using nlohmann::json;
using scoring::ComponentKind;

namespace {

std::optional<SlotSpec> slot_from_json(const json& doc) {
    if (doc.is_null()) return std::nullopt;
    return SlotSpec{doc.at("name").get<std::string>(), doc.at("description").get<std::string>()};
}

json slot_to_json(const std::optional<SlotSpec>& slot) {
    if (!slot) return nullptr;
    return {{"name", slot->name}, {"description", slot->description}};
}

}  // namespace

bool is_function_kind(ComponentKind kind) {
    return kind == ComponentKind::InputLogic || kind == ComponentKind::StateTransition ||
           kind == ComponentKind::UiRendering;
}

core::FunctionKind function_kind_for(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::InputLogic: return core::FunctionKind::InputLogic;
        case ComponentKind::StateTransition: return core::FunctionKind::Logic;
        case ComponentKind::UiRendering: return core::FunctionKind::Render;
        default: break;
    }
    throw InvalidArtifact(std::string(scoring::to_string(kind)) + " does not produce a function");
}

DesignerArtifact artifact_from_json(ComponentKind kind, const json& doc) {
    if (auto err = llm::schema_error({llm::SchemaFamily::DesignerArtifact, kind}, doc)) {
        throw InvalidArtifact(std::string(scoring::to_string(kind)) + " artifact: " + *err);
    }
    DesignerArtifact artifact;
    artifact.kind = kind;
    switch (kind) {
        case ComponentKind::StateChange: {
            StateChangePayload p;
            p.relevant_variable_names = doc.at("relevant_variables").get<std::vector<std::string>>();
            for (const auto& v : doc.at("new_variables")) {
                core::StateVariable var;
                var.name = v.at("name").get<std::string>();
                var.value = v.at("value").get<std::string>();
                var.type = *core::parse_value_type(v.at("type").get<std::string>());
                var.description = v.at("description").get<std::string>();
                p.new_variables.push_back(std::move(var));
            }
            artifact.payload = std::move(p);
            break;
        }
        case ComponentKind::Decompose: {
            StepDecomposition d;
            d.input_logic = slot_from_json(doc.at("input_logic"));
            d.state_transition = slot_from_json(doc.at("state_transition"));
            d.ui_rendering = slot_from_json(doc.at("ui_rendering"));
            artifact.payload = std::move(d);
            break;
        }
        default: {
            FunctionPayload f;
            f.function_name = doc.at("function_name").get<std::string>();
            f.description = doc.at("description").get<std::string>();
            f.implementation = doc.at("implementation").get<std::string>();
            f.relevant_state = doc.at("relevant_state").get<std::vector<std::string>>();
            artifact.payload = std::move(f);
            break;
        }
    }
    return artifact;
}

json to_json(const DesignerArtifact& artifact) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, StateChangePayload>) {
                json vars = json::array();
                for (const auto& v : p.new_variables) {
                    vars.push_back({{"name", v.name},
                                    {"value", v.value},
                                    {"type", std::string(core::to_string(v.type))},
                                    {"description", v.description}});
                }
                return {{"relevant_variables", p.relevant_variable_names}, {"new_variables", vars}};
            } else if constexpr (std::is_same_v<T, StepDecomposition>) {
                return {{"input_logic", slot_to_json(p.input_logic)},
                        {"state_transition", slot_to_json(p.state_transition)},
                        {"ui_rendering", slot_to_json(p.ui_rendering)}};
            } else {
                return {{"function_name", p.function_name},
                        {"description", p.description},
                        {"implementation", p.implementation},
                        {"relevant_state", p.relevant_state}};
            }
        },
        artifact.payload);
}

core::FunctionArtifact to_function(const DesignerArtifact& artifact) {
    const auto* p = std::get_if<FunctionPayload>(&artifact.payload);
    if (p == nullptr) throw InvalidArtifact("artifact does not carry a function");
    core::FunctionArtifact fn;
    fn.name = p->function_name;
    fn.kind = function_kind_for(artifact.kind);
    fn.code = p->implementation;
    fn.relevant_state = p->relevant_state;
    fn.description = p->description;
    return fn;
}

}  // namespace simforge::agents
