#include "simforge/core/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "simforge/errors.hpp"

namespace simforge::core {

namespace {

constexpr std::array<std::pair<ValueType, std::string_view>, 6> kValueTypeNames{{
    {ValueType::Int, "int"},
    {ValueType::Float, "float"},
    {ValueType::Bool, "bool"},
    {ValueType::String, "string"},
    {ValueType::List, "list"},
    {ValueType::Dict, "dict"},
}};

constexpr std::array<std::pair<FunctionKind, std::string_view>, 3> kFunctionKindNames{{
    {FunctionKind::InputLogic, "input_logic"},
    {FunctionKind::Logic, "logic"},
    {FunctionKind::Render, "render"},
}};

std::string one_line(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

std::string_view trim_trailing_newlines(std::string_view code) {
    while (!code.empty() && (code.back() == '\n' || code.back() == '\r' || code.back() == ' ')) {
        code.remove_suffix(1);
    }
    return code;
}

void check_variable(const StateVariable& var) {
    if (!is_identifier(var.name)) {
        throw InvalidModel("state variable name '" + var.name + "' is not an identifier");
    }
    if (!literal_matches(var.value, var.type)) {
        throw InvalidModel("state variable '" + var.name + "' value '" + var.value +
                           "' does not parse as " + std::string(to_string(var.type)));
    }
}

bool function_uses(const FunctionArtifact& fn, std::string_view var) {
    return std::find(fn.relevant_state.begin(), fn.relevant_state.end(), var) != fn.relevant_state.end() ||
           contains_word(fn.code, var);
}

}  // namespace

std::string_view to_string(ValueType type) {
    for (const auto& [t, name] : kValueTypeNames) {
        if (t == type) return name;
    }
    return "int";
}

std::optional<ValueType> parse_value_type(std::string_view text) {
    for (const auto& [t, name] : kValueTypeNames) {
        if (name == text) return t;
    }
    // Common aliases from model output.
    if (text == "str") return ValueType::String;
    if (text == "dict-like") return ValueType::Dict;
    return std::nullopt;
}

std::string_view to_string(FunctionKind kind) {
    for (const auto& [k, name] : kFunctionKindNames) {
        if (k == kind) return name;
    }
    return "logic";
}

std::optional<FunctionKind> parse_function_kind(std::string_view text) {
    for (const auto& [k, name] : kFunctionKindNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

const StateVariable* SessionModel::find_variable(std::string_view name) const {
    auto it = std::find_if(state_variables.begin(), state_variables.end(),
                           [&](const StateVariable& v) { return v.name == name; });
    return it == state_variables.end() ? nullptr : &*it;
}

const FunctionArtifact* SessionModel::find_function(std::string_view name) const {
    auto it = std::find_if(functions.begin(), functions.end(),
                           [&](const FunctionArtifact& f) { return f.name == name; });
    return it == functions.end() ? nullptr : &*it;
}

SessionModel new_initial_session(const InitialDimensions& dims) {
    SessionModel session;
    session.state_variables = {
        {"score", "0", ValueType::Int, "Player score", true},
        {"screen_width", std::to_string(dims.screen_width), ValueType::Int, "Window width in pixels", true},
        {"screen_height", std::to_string(dims.screen_height), ValueType::Int, "Window height in pixels", true},
        {"fps", std::to_string(dims.fps), ValueType::Int, "Frames per second", true},
    };
    return session;
}

void validate(const SessionModel& session) {
    std::set<std::string> seen;
    for (const auto& var : session.state_variables) {
        check_variable(var);
        if (!seen.insert(var.name).second) {
            throw InvalidModel("duplicate state variable '" + var.name + "'");
        }
    }
    std::set<std::string> fn_names;
    for (const auto& fn : session.functions) {
        if (!is_identifier(fn.name)) {
            throw InvalidModel("function name '" + fn.name + "' is not an identifier");
        }
        if (!fn_names.insert(fn.name).second) {
            throw InvalidModel("duplicate function '" + fn.name + "'");
        }
        for (const auto& ref : fn.relevant_state) {
            if (!seen.contains(ref)) {
                throw InvalidModel("function '" + fn.name + "' references unknown state variable '" + ref + "'");
            }
        }
    }
}

SessionModel with_variables(const SessionModel& session, const std::vector<StateVariable>& vars) {
    SessionModel next = session;
    for (const auto& var : vars) {
        check_variable(var);
        if (next.find_variable(var.name) != nullptr) {
            throw InvalidModel("state variable '" + var.name + "' already exists");
        }
        next.state_variables.push_back(var);
    }
    return next;
}

SessionModel with_function(const SessionModel& session, const FunctionArtifact& fn) {
    if (!is_identifier(fn.name)) {
        throw InvalidModel("function name '" + fn.name + "' is not an identifier");
    }
    for (const auto& ref : fn.relevant_state) {
        if (session.find_variable(ref) == nullptr) {
            throw InvalidModel("function '" + fn.name + "' references unknown state variable '" + ref + "'");
        }
    }
    SessionModel next = session;
    auto it = std::find_if(next.functions.begin(), next.functions.end(),
                           [&](const FunctionArtifact& f) { return f.name == fn.name; });
    if (it != next.functions.end()) {
        *it = fn;
    } else {
        next.functions.push_back(fn);
    }
    return next;
}

ScopeSet full_scope(const SessionModel& session) {
    ScopeSet scope;
    for (const auto& var : session.state_variables) scope.variable_names.insert(var.name);
    for (const auto& fn : session.functions) scope.function_names.insert(fn.name);
    return scope;
}

ScopeSet scope_for(const SessionModel& session, const std::set<std::string>& selected) {
    ScopeSet scope;
    for (const auto& name : selected) {
        if (session.find_variable(name) == nullptr) {
            throw UnknownName("unknown state variable '" + name + "'");
        }
        scope.variable_names.insert(name);
    }
    for (const auto& fn : session.functions) {
        bool overlaps = std::any_of(fn.relevant_state.begin(), fn.relevant_state.end(),
                                    [&](const std::string& v) { return selected.contains(v); });
        if (overlaps) scope.function_names.insert(fn.name);
    }
    for (const auto& fn : session.functions) {
        if (!scope.function_names.contains(fn.name)) continue;
        for (const auto& var : session.state_variables) {
            if (function_uses(fn, var.name)) scope.variable_names.insert(var.name);
        }
    }
    return scope;
}

std::string render_state_manager(const std::vector<StateVariable>& vars, std::string_view indent) {
    std::string out;
    out += indent;
    out += "class StateManager:\n";
    out += indent;
    out += "    def __init__(self):\n";
    if (vars.empty()) {
        out += indent;
        out += "        pass\n";
    }
    for (const auto& var : vars) {
        out += indent;
        out += "        self." + var.name + " = " + var.value;
        if (!var.description.empty()) out += "  # " + one_line(var.description);
        out += '\n';
    }
    return out;
}

std::string project_context(const SessionModel& session, const ScopeSet& scope) {
    for (const auto& name : scope.variable_names) {
        if (session.find_variable(name) == nullptr) {
            throw UnknownName("scope names unknown state variable '" + name + "'");
        }
    }
    for (const auto& name : scope.function_names) {
        if (session.find_function(name) == nullptr) {
            throw UnknownName("scope names unknown function '" + name + "'");
        }
    }

    std::vector<StateVariable> vars;
    for (const auto& var : session.state_variables) {
        if (scope.variable_names.contains(var.name)) vars.push_back(var);
    }
    std::string out = render_state_manager(vars);
    for (const auto& fn : session.functions) {
        if (!scope.function_names.contains(fn.name)) continue;
        out += "\n\n";
        out += trim_trailing_newlines(fn.code);
        out += '\n';
    }
    return out;
}

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

double context_reduction_ratio(const SessionModel& session, const ScopeSet& scope, const TokenCounter& counter) {
    std::size_t full = counter(project_context(session, full_scope(session)));
    if (full == 0) {
        throw EmptySession("full context has zero tokens");
    }
    std::size_t scoped = counter(project_context(session, scope));
    return static_cast<double>(scoped) / static_cast<double>(full);
}

SessionModel clean_states(const SessionModel& session) {
    SessionModel next = session;
    std::erase_if(next.state_variables, [&](const StateVariable& var) {
        if (var.dont_clean) return false;
        return std::none_of(session.functions.begin(), session.functions.end(),
                            [&](const FunctionArtifact& fn) { return function_uses(fn, var.name); });
    });
    return next;
}

}  // namespace simforge::core
