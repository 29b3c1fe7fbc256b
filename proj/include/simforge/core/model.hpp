#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace simforge::core {

enum class ValueType { Int, Float, Bool, String, List, Dict };

std::string_view to_string(ValueType type);
std::optional<ValueType> parse_value_type(std::string_view text);

/// True when `literal` is a well-formed literal of `type` in the generated-code dialect
/// (Python literal syntax: `True`, `3.5`, `'text'`, `[1, 2]`, `{'k': 1}`).
bool literal_matches(std::string_view literal, ValueType type);

bool is_identifier(std::string_view text);

/// True when `word` occurs in `text` delimited by non-identifier characters.
bool contains_word(std::string_view text, std::string_view word);

struct StateVariable {
    std::string name;
    std::string value;
    ValueType type = ValueType::Int;
    std::string description;
    bool dont_clean = false;

    bool operator==(const StateVariable&) const = default;
};

/// MVC role of a generated function: controller, model, or view.
enum class FunctionKind { InputLogic, Logic, Render };

std::string_view to_string(FunctionKind kind);
std::optional<FunctionKind> parse_function_kind(std::string_view text);

struct FunctionArtifact {
    std::string name;
    FunctionKind kind = FunctionKind::Logic;
    std::string code;
    std::vector<std::string> relevant_state;
    std::string description;

    bool operator==(const FunctionArtifact&) const = default;
};

struct ScopeSet {
    std::set<std::string> variable_names;
    std::set<std::string> function_names;

    bool operator==(const ScopeSet&) const = default;
};

/// The evolving factored game model: state factors, generated functions,
/// the processed step instructions and pipeline metadata.
struct SessionModel {
    std::vector<StateVariable> state_variables;
    std::vector<FunctionArtifact> functions;
    std::vector<std::string> queries;
    std::map<std::string, std::string> metadata;

    const StateVariable* find_variable(std::string_view name) const;
    const FunctionArtifact* find_function(std::string_view name) const;

    bool operator==(const SessionModel&) const = default;
};

struct InitialDimensions {
    int screen_width = 800;
    int screen_height = 600;
    int fps = 60;
};

SessionModel new_initial_session(const InitialDimensions& dims = {});

/// Throws InvalidModel describing the first broken invariant.
void validate(const SessionModel& session);

/// Returns a copy with `vars` appended. Throws InvalidModel on a duplicate name
/// or a value that does not parse as its declared type.
SessionModel with_variables(const SessionModel& session, const std::vector<StateVariable>& vars);

/// Returns a copy with `fn` integrated: a same-named function is replaced in
/// place, otherwise `fn` is appended. Throws InvalidModel when `fn` names a
/// state variable the session does not have.
SessionModel with_function(const SessionModel& session, const FunctionArtifact& fn);

ScopeSet full_scope(const SessionModel& session);

/// Scope for a step that selected `selected` variables: every stored function
/// whose relevant_state overlaps the selection, plus the variables those
/// functions touch (one closure pass). Throws UnknownName for a missing variable.
ScopeSet scope_for(const SessionModel& session, const std::set<std::string>& selected);

/// The state-manager fragment for `vars`, one declaration per line.
std::string render_state_manager(const std::vector<StateVariable>& vars, std::string_view indent = "");

/// Serialized scoped context: state-manager fragment of the scope's variables,
/// then the scope's function sources, both in declaration order.
std::string project_context(const SessionModel& session, const ScopeSet& scope);

using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view text);

/// |scoped context| / |full context| under `counter`.
double context_reduction_ratio(const SessionModel& session, const ScopeSet& scope,
                               const TokenCounter& counter = whitespace_token_count);

/// Drops variables that no function lists or mentions, unless protected.
SessionModel clean_states(const SessionModel& session);

}  // namespace simforge::core
