#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "simforge/llm/backend.hpp"

namespace simforge::llm {

enum class ScriptedFailure { None, RateLimited, Transport };

struct ScriptedEntry {
    RequestKey key;
    ChatResponse response;
    ScriptedFailure failure = ScriptedFailure::None;
};

/// Canned responses keyed by (agent_role, step, round). Several entries may
/// share a key; they are replayed in file order, which is how retries and
/// corrective re-asks get distinct replies.
///
/// File format (YAML):
///
///     strict: true
///     responses:
///       - role: state_change.designer
///         step: 1
///         round: 0
///         content: {relevant_variables: [screen_height], new_variables: []}
///         usage: {input: 120, output: 40}
///       - role: state_change.planner
///         step: 1
///         round: 0
///         tool_calls:
///           - name: request_design_change
///             arguments: {instruction: "Add a velocity variable"}
///
/// `content` may be a string or a mapping (sent as compact JSON). An entry
/// may set `error: rate_limited` or `error: transport` to fail that call.
struct ScriptedScenario {
    std::vector<ScriptedEntry> entries;
    bool strict = true;

    ScriptedScenario& add(RequestKey key, std::string content, Usage usage = {});
    ScriptedScenario& add(ScriptedEntry entry);

    static ScriptedScenario parse(const std::string& yaml_text);
    static ScriptedScenario load(const std::filesystem::path& path);
};

/// Deterministic backend replaying a ScriptedScenario. Strict mode raises
/// ScenarioExhausted for a key with no unconsumed entry; lenient mode repeats
/// the key's last entry. Every request is recorded.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(ScriptedScenario scenario);

    ChatResponse complete(const ChatRequest& request) override;

    std::vector<ChatRequest> requests() const;
    std::size_t unconsumed() const;

private:
    ScriptedScenario scenario_;
    std::map<RequestKey, std::vector<std::size_t>> by_key_;
    std::map<RequestKey, std::size_t> cursor_;
    std::vector<ChatRequest> requests_;
    mutable std::mutex mutex_;
};

}  // namespace simforge::llm
