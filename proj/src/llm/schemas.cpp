#include "simforge/llm/schemas.hpp"

#include <regex>

#include "simforge/errors.hpp"

namespace simforge::llm {

namespace {

using nlohmann::json;
using scoring::ComponentKind;

constexpr const char* kIdentifierPattern = "^[A-Za-z_][A-Za-z0-9_]*$";

json string_schema() { return {{"type", "string"}}; }

json identifier_schema() { return {{"type", "string"}, {"pattern", kIdentifierPattern}}; }

json object_schema(json properties) {
    json required = json::array();
    for (auto it = properties.begin(); it != properties.end(); ++it) required.push_back(it.key());
    return {
        {"type", "object"},
        {"properties", std::move(properties)},
        {"required", std::move(required)},
        {"additionalProperties", false},
    };
}

json critique_schema(ComponentKind kind) {
    json props = json::object();
    for (auto category : scoring::rubric(kind)) {
        props[std::string(category)] = {{"type", "integer"}, {"minimum", scoring::kMinScore},
                                        {"maximum", scoring::kMaxScore}};
    }
    props["feedback"] = string_schema();
    props["suggestions"] = {{"type", "array"}, {"items", string_schema()}};
    return object_schema(std::move(props));
}

json slot_schema() {
    json slot = object_schema({{"name", identifier_schema()}, {"description", string_schema()}});
    slot["type"] = json::array({"object", "null"});
    return slot;
}

json designer_schema(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::StateChange: {
            json var = object_schema({
                {"name", identifier_schema()},
                {"value", string_schema()},
                {"type", {{"type", "string"}, {"enum", {"int", "float", "bool", "string", "list", "dict"}}}},
                {"description", string_schema()},
            });
            return object_schema({
                {"relevant_variables", {{"type", "array"}, {"items", identifier_schema()}}},
                {"new_variables", {{"type", "array"}, {"items", var}}},
            });
        }
        case ComponentKind::Decompose:
            return object_schema({
                {"input_logic", slot_schema()},
                {"state_transition", slot_schema()},
                {"ui_rendering", slot_schema()},
            });
        case ComponentKind::InputLogic:
        case ComponentKind::StateTransition:
        case ComponentKind::UiRendering: {
            json relevant = {{"type", "array"}, {"items", identifier_schema()}};
            if (kind == ComponentKind::StateTransition) relevant["minItems"] = 1;
            return object_schema({
                {"function_name", identifier_schema()},
                {"description", string_schema()},
                {"implementation", string_schema()},
                {"relevant_state", relevant},
            });
        }
    }
    return json::object();
}

json step_plan_schema() {
    return object_schema({
        {"steps", {{"type", "array"}, {"items", {{"type", "string"}, {"minLength", 1}}}}},
    });
}

bool type_matches(const json& doc, const std::string& type) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "integer") return doc.is_number_integer();
    if (type == "number") return doc.is_number();
    if (type == "boolean") return doc.is_boolean();
    if (type == "null") return doc.is_null();
    return false;
}

// Validator for the JSON-schema subset the documents above use.
std::optional<std::string> check(const json& schema, const json& doc, const std::string& path) {
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(doc, t.get<std::string>());
        } else {
            for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
        }
        if (!ok) return path + ": expected " + t.dump() + ", got " + doc.type_name();
    }
    if (doc.is_null()) return std::nullopt;
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema["enum"]) found = found || v == doc;
        if (!found) return path + ": value " + doc.dump() + " not in " + schema["enum"].dump();
    }
    if (doc.is_number_integer()) {
        auto v = doc.get<std::int64_t>();
        if (schema.contains("minimum") && v < schema["minimum"].get<std::int64_t>()) {
            return path + ": " + std::to_string(v) + " is below minimum " + schema["minimum"].dump();
        }
        if (schema.contains("maximum") && v > schema["maximum"].get<std::int64_t>()) {
            return path + ": " + std::to_string(v) + " is above maximum " + schema["maximum"].dump();
        }
    }
    if (doc.is_string()) {
        const auto& s = doc.get_ref<const std::string&>();
        if (schema.contains("minLength") && s.size() < schema["minLength"].get<std::size_t>()) {
            return path + ": string shorter than " + schema["minLength"].dump();
        }
        if (schema.contains("pattern") && !std::regex_search(s, std::regex(schema["pattern"].get<std::string>()))) {
            return path + ": '" + s + "' does not match " + schema["pattern"].get<std::string>();
        }
    }
    if (doc.is_array()) {
        if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
            return path + ": needs at least " + schema["minItems"].dump() + " items";
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < doc.size(); ++i) {
                if (auto err = check(schema["items"], doc[i], path + "[" + std::to_string(i) + "]")) return err;
            }
        }
    }
    if (doc.is_object()) {
        const json props = schema.value("properties", json::object());
        for (const auto& name : schema.value("required", json::array())) {
            if (!doc.contains(name.get<std::string>())) {
                return path + ": missing required field '" + name.get<std::string>() + "'";
            }
        }
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (props.contains(it.key())) {
                if (auto err = check(props[it.key()], it.value(), path + "." + it.key())) return err;
            } else if (!schema.value("additionalProperties", true)) {
                return path + ": unexpected field '" + it.key() + "'";
            }
        }
    }
    return std::nullopt;
}

}  // namespace

json json_schema(const SchemaId& id) {
    json body;
    switch (id.family) {
        case SchemaFamily::Critique: body = critique_schema(id.kind); break;
        case SchemaFamily::DesignerArtifact: body = designer_schema(id.kind); break;
        case SchemaFamily::StepPlan: body = step_plan_schema(); break;
    }
    body["$schema"] = "https://json-schema.org/draft/2020-12/schema";
    body["title"] = id.name();
    return body;
}

std::vector<SchemaId> all_schemas() {
    std::vector<SchemaId> out;
    for (auto kind : scoring::kAllKinds) out.push_back({SchemaFamily::Critique, kind});
    for (auto kind : scoring::kAllKinds) out.push_back({SchemaFamily::DesignerArtifact, kind});
    out.push_back({SchemaFamily::StepPlan, ComponentKind::StateChange});
    return out;
}

std::optional<std::string> schema_error(const SchemaId& id, const json& doc) {
    if (auto err = check(json_schema(id), doc, "$")) return err;
    if (id.family == SchemaFamily::DesignerArtifact && id.kind == ComponentKind::Decompose) {
        bool any = doc["input_logic"].is_object() || doc["state_transition"].is_object() ||
                   doc["ui_rendering"].is_object();
        if (!any) return std::string("$: decomposition must fill at least one of input_logic, state_transition, "
                                     "ui_rendering");
    }
    return std::nullopt;
}

scoring::Critique critique_from_json(ComponentKind kind, const json& doc) {
    if (auto err = schema_error({SchemaFamily::Critique, kind}, doc)) {
        throw SchemaViolation("critique does not match schema: " + *err);
    }
    scoring::Critique c;
    c.kind = kind;
    for (auto category : scoring::rubric(kind)) c.scores.push_back(doc.at(std::string(category)).get<int>());
    c.feedback = doc.at("feedback").get<std::string>();
    c.suggestions = doc.at("suggestions").get<std::vector<std::string>>();
    return c;
}

json to_json(const scoring::Critique& critique) {
    json doc = json::object();
    auto categories = scoring::rubric(critique.kind);
    for (std::size_t i = 0; i < categories.size() && i < critique.scores.size(); ++i) {
        doc[std::string(categories[i])] = critique.scores[i];
    }
    doc["feedback"] = critique.feedback;
    doc["suggestions"] = critique.suggestions;
    return doc;
}

}  // namespace simforge::llm
