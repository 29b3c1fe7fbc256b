#include "simforge/core/json.hpp"

#include "simforge/errors.hpp"

namespace simforge::core {

using nlohmann::json;

json to_json(const StateVariable& var) {
    return {
        {"name", var.name},
        {"value", var.value},
        {"type", std::string(to_string(var.type))},
        {"description", var.description},
        {"dont_clean", var.dont_clean},
    };
}

json to_json(const FunctionArtifact& fn) {
    return {
        {"name", fn.name},
        {"kind", std::string(to_string(fn.kind))},
        {"code", fn.code},
        {"relevant_state", fn.relevant_state},
        {"description", fn.description},
    };
}

json to_json(const SessionModel& session) {
    json vars = json::array();
    for (const auto& v : session.state_variables) vars.push_back(to_json(v));
    json fns = json::array();
    for (const auto& f : session.functions) fns.push_back(to_json(f));
    return {
        {"state_variables", vars},
        {"functions", fns},
        {"queries", session.queries},
        {"metadata", session.metadata},
    };
}

StateVariable state_variable_from_json(const json& doc) {
    try {
        StateVariable var;
        var.name = doc.at("name").get<std::string>();
        var.value = doc.at("value").get<std::string>();
        auto type = parse_value_type(doc.at("type").get<std::string>());
        if (!type) throw InvalidModel("unknown value type for '" + var.name + "'");
        var.type = *type;
        var.description = doc.value("description", "");
        var.dont_clean = doc.value("dont_clean", false);
        return var;
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("malformed state variable: ") + e.what());
    }
}

FunctionArtifact function_from_json(const json& doc) {
    try {
        FunctionArtifact fn;
        fn.name = doc.at("name").get<std::string>();
        auto kind = parse_function_kind(doc.at("kind").get<std::string>());
        if (!kind) throw InvalidModel("unknown function kind for '" + fn.name + "'");
        fn.kind = *kind;
        fn.code = doc.at("code").get<std::string>();
        fn.relevant_state = doc.value("relevant_state", std::vector<std::string>{});
        fn.description = doc.value("description", "");
        return fn;
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("malformed function: ") + e.what());
    }
}

SessionModel session_from_json(const json& doc) {
    try {
        SessionModel session;
        for (const auto& v : doc.at("state_variables")) session.state_variables.push_back(state_variable_from_json(v));
        for (const auto& f : doc.at("functions")) session.functions.push_back(function_from_json(f));
        session.queries = doc.at("queries").get<std::vector<std::string>>();
        session.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
        return session;
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("malformed session document: ") + e.what());
    }
}

}  // namespace simforge::core
