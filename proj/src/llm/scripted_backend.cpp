#include "simforge/llm/scripted_backend.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "simforge/errors.hpp"

namespace simforge::llm {

namespace {

using nlohmann::json;

// Plain YAML scalars get type inference; quoted ones stay strings.
json scalar_to_json(const YAML::Node& node) {
    const std::string& text = node.Scalar();
    if (node.Tag() == "!") return text;
    if (text == "null" || text == "~") return nullptr;
    if (text == "true") return true;
    if (text == "false") return false;
    if (!text.empty()) {
        std::size_t used = 0;
        try {
            long long v = std::stoll(text, &used);
            if (used == text.size()) return v;
        } catch (const std::exception&) {
        }
        try {
            double d = std::stod(text, &used);
            if (used == text.size()) return d;
        } catch (const std::exception&) {
        }
    }
    return text;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Scalar: return scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
    }
    return nullptr;
}

ScriptedEntry entry_from_yaml(const YAML::Node& node, std::size_t index) {
    auto where = "responses[" + std::to_string(index) + "]";
    if (!node.IsMap()) throw ParseError(where + " must be a mapping");
    ScriptedEntry entry;
    try {
        entry.key.agent_role = node["role"].as<std::string>();
        entry.key.step_index = node["step"] ? node["step"].as<int>() : 0;
        entry.key.round = node["round"] ? node["round"].as<int>() : 0;
        if (const auto& content = node["content"]) {
            entry.response.content = content.IsScalar() ? content.Scalar() : yaml_to_json(content).dump();
        }
        if (const auto& calls = node["tool_calls"]) {
            for (const auto& call : calls) {
                ToolCall tc;
                tc.name = call["name"].as<std::string>();
                if (call["arguments"]) tc.arguments = yaml_to_json(call["arguments"]);
                entry.response.tool_calls.push_back(std::move(tc));
            }
        }
        if (const auto& usage = node["usage"]) {
            entry.response.usage.input_tokens = usage["input"] ? usage["input"].as<std::int64_t>() : 0;
            entry.response.usage.output_tokens = usage["output"] ? usage["output"].as<std::int64_t>() : 0;
        }
        if (const auto& error = node["error"]) {
            auto kind = error.as<std::string>();
            if (kind == "rate_limited") entry.failure = ScriptedFailure::RateLimited;
            else if (kind == "transport") entry.failure = ScriptedFailure::Transport;
            else throw ParseError(where + ": unknown error kind '" + kind + "'");
        }
    } catch (const YAML::Exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (entry.key.agent_role.empty()) throw ParseError(where + ": role must be non-empty");
    return entry;
}

}  // namespace

ScriptedScenario& ScriptedScenario::add(RequestKey key, std::string content, Usage usage) {
    ScriptedEntry entry;
    entry.key = std::move(key);
    entry.response.content = std::move(content);
    entry.response.usage = usage;
    return add(std::move(entry));
}

ScriptedScenario& ScriptedScenario::add(ScriptedEntry entry) {
    entries.push_back(std::move(entry));
    return *this;
}

ScriptedScenario ScriptedScenario::parse(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("scenario is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ParseError("scenario root must be a mapping");
    ScriptedScenario scenario;
    if (root["strict"]) scenario.strict = root["strict"].as<bool>();
    const auto& responses = root["responses"];
    if (!responses || !responses.IsSequence()) throw ParseError("scenario needs a 'responses' list");
    std::size_t i = 0;
    for (const auto& node : responses) scenario.entries.push_back(entry_from_yaml(node, i++));
    return scenario;
}

ScriptedScenario ScriptedScenario::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read scenario '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

ScriptedBackend::ScriptedBackend(ScriptedScenario scenario) : scenario_(std::move(scenario)) {
    for (std::size_t i = 0; i < scenario_.entries.size(); ++i) {
        by_key_[scenario_.entries[i].key].push_back(i);
    }
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    auto it = by_key_.find(request.key);
    if (it == by_key_.end()) {
        throw ScenarioExhausted("scenario has no response for " + to_string(request.key));
    }
    std::size_t& cursor = cursor_[request.key];
    std::size_t slot = cursor;
    if (slot >= it->second.size()) {
        if (scenario_.strict) {
            throw ScenarioExhausted("scenario responses for " + to_string(request.key) + " are exhausted");
        }
        slot = it->second.size() - 1;
    } else {
        ++cursor;
    }
    const ScriptedEntry& entry = scenario_.entries[it->second[slot]];
    switch (entry.failure) {
        case ScriptedFailure::RateLimited: throw RateLimited("scripted rate limit for " + to_string(request.key));
        case ScriptedFailure::Transport: throw TransportError("scripted transport failure for " + to_string(request.key));
        case ScriptedFailure::None: break;
    }
    return entry.response;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t ScriptedBackend::unconsumed() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [key, slots] : by_key_) {
        auto it = cursor_.find(key);
        std::size_t used = it == cursor_.end() ? 0 : it->second;
        n += slots.size() - std::min(used, slots.size());
    }
    return n;
}

}  // namespace simforge::llm
