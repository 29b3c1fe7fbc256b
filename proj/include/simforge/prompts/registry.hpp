#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simforge/scoring/scoring.hpp"

namespace simforge::prompts {

enum class AgentRole { Planner, Designer, Critic };

std::string_view to_string(AgentRole role);

/// `<component_kind>/<role>`, e.g. `state_change/planner`.
std::string template_id(scoring::ComponentKind kind, AgentRole role);

/// Template used to split a whole game description into steps.
inline constexpr std::string_view kSpecDecomposerId = "spec/decomposer";

/// The 15 (kind, role) ids every registry must provide.
std::vector<std::string> required_template_ids();

struct PromptTemplate {
    std::string id;
    std::string body;
    std::set<std::string> declared_variables;
};

/// Placeholder names in `body`. `{name}` is a placeholder, `{{` and `}}`
/// are escaped braces, and any other brace is literal text.
std::set<std::string> placeholders(std::string_view body);

using Bindings = std::map<std::string, std::string>;

class PromptRegistry {
public:
    /// Loads every `*.yaml` file in `directory`. Each file holds `id`,
    /// `variables` and `body`. Throws ParseError, UndeclaredPlaceholder,
    /// UnusedDeclaration, DuplicateTemplate, or MissingTemplates (listing
    /// every absent required id).
    static PromptRegistry load(const std::filesystem::path& directory);

    /// Same checks as load(), over in-memory templates.
    static PromptRegistry from_templates(std::vector<PromptTemplate> templates, bool require_complete = true);

    /// Throws UnknownTemplate, or MissingBinding naming every unbound variable.
    /// Bindings the template does not declare are ignored.
    std::string render(std::string_view id, const Bindings& bindings) const;

    bool contains(std::string_view id) const;
    const PromptTemplate& get(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace simforge::prompts
