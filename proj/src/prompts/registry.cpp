#include "simforge/prompts/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>

#include "simforge/core/model.hpp"
#include "simforge/errors.hpp"

namespace simforge::prompts {

namespace {

// Length of the `{name}` placeholder starting at body[pos], or 0.
std::size_t placeholder_at(std::string_view body, std::size_t pos) {
    if (body[pos] != '{') return 0;
    auto close = body.find('}', pos + 1);
    if (close == std::string_view::npos) return 0;
    if (!core::is_identifier(body.substr(pos + 1, close - pos - 1))) return 0;
    return close - pos + 1;
}

template <typename OnText, typename OnPlaceholder>
void scan(std::string_view body, OnText on_text, OnPlaceholder on_placeholder) {
    std::size_t i = 0;
    while (i < body.size()) {
        if (body.compare(i, 2, "{{") == 0) {
            on_text("{");
            i += 2;
        } else if (body.compare(i, 2, "}}") == 0) {
            on_text("}");
            i += 2;
        } else if (auto n = placeholder_at(body, i); n > 0) {
            on_placeholder(body.substr(i + 1, n - 2));
            i += n;
        } else {
            on_text(body.substr(i, 1));
            ++i;
        }
    }
}

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

void check_declarations(const PromptTemplate& t) {
    auto used = placeholders(t.body);
    std::vector<std::string> undeclared;
    std::set_difference(used.begin(), used.end(), t.declared_variables.begin(), t.declared_variables.end(),
                        std::back_inserter(undeclared));
    if (!undeclared.empty()) {
        throw UndeclaredPlaceholder("template '" + t.id + "' uses undeclared placeholder(s): " + join(undeclared));
    }
    std::vector<std::string> unused;
    std::set_difference(t.declared_variables.begin(), t.declared_variables.end(), used.begin(), used.end(),
                        std::back_inserter(unused));
    if (!unused.empty()) {
        throw UnusedDeclaration("template '" + t.id + "' declares unused variable(s): " + join(unused));
    }
}

PromptTemplate parse_file(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ParseError("cannot parse template '" + path.string() + "': " + e.what());
    }
    if (!root.IsMap()) throw ParseError("template '" + path.string() + "' must be a mapping");
    PromptTemplate t;
    try {
        if (!root["id"] || !root["body"]) throw ParseError("template '" + path.string() + "' needs id and body");
        t.id = root["id"].as<std::string>();
        t.body = root["body"].as<std::string>();
        if (const auto& vars = root["variables"]) {
            if (!vars.IsSequence()) throw ParseError("template '" + t.id + "': variables must be a list");
            for (const auto& v : vars) t.declared_variables.insert(v.as<std::string>());
        }
    } catch (const YAML::Exception& e) {
        throw ParseError("template '" + path.string() + "': " + e.what());
    }
    return t;
}

}  // namespace

std::string_view to_string(AgentRole role) {
    switch (role) {
        case AgentRole::Planner: return "planner";
        case AgentRole::Designer: return "designer";
        case AgentRole::Critic: return "critic";
    }
    return "planner";
}

std::string template_id(scoring::ComponentKind kind, AgentRole role) {
    return std::string(scoring::to_string(kind)) + "/" + std::string(to_string(role));
}

std::vector<std::string> required_template_ids() {
    std::vector<std::string> ids;
    for (auto kind : scoring::kAllKinds) {
        for (auto role : {AgentRole::Planner, AgentRole::Designer, AgentRole::Critic}) {
            ids.push_back(template_id(kind, role));
        }
    }
    return ids;
}

std::set<std::string> placeholders(std::string_view body) {
    std::set<std::string> names;
    scan(body, [](std::string_view) {}, [&](std::string_view name) { names.emplace(name); });
    return names;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory)) {
        throw ParseError("prompt directory '" + directory.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<PromptTemplate> templates;
    for (const auto& f : files) templates.push_back(parse_file(f));
    return from_templates(std::move(templates), true);
}

PromptRegistry PromptRegistry::from_templates(std::vector<PromptTemplate> templates, bool require_complete) {
    PromptRegistry registry;
    for (auto& t : templates) {
        if (t.id.empty()) throw ParseError("template with empty id");
        check_declarations(t);
        if (registry.templates_.contains(t.id)) throw DuplicateTemplate("duplicate template id '" + t.id + "'");
        std::string id = t.id;
        registry.templates_.emplace(std::move(id), std::move(t));
    }
    if (require_complete) {
        std::vector<std::string> missing;
        for (const auto& id : required_template_ids()) {
            if (!registry.contains(id)) missing.push_back(id);
        }
        if (!missing.empty()) throw MissingTemplates("missing prompt template(s): " + join(missing));
    }
    return registry;
}

std::string PromptRegistry::render(std::string_view id, const Bindings& bindings) const {
    const PromptTemplate& t = get(id);
    std::vector<std::string> missing;
    for (const auto& name : t.declared_variables) {
        if (!bindings.contains(name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        throw MissingBinding("template '" + t.id + "' is missing binding(s): " + join(missing), missing);
    }
    std::string out;
    out.reserve(t.body.size());
    scan(t.body, [&](std::string_view text) { out += text; },
         [&](std::string_view name) { out += bindings.at(std::string(name)); });
    return out;
}

bool PromptRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplate("unknown template '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, t] : templates_) out.push_back(id);
    return out;
}

}  // namespace simforge::prompts
