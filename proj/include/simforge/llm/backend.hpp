#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "simforge/scoring/scoring.hpp"

namespace simforge::llm {

enum class Speaker { User, Assistant, Tool };

std::string_view to_string(Speaker speaker);

struct Message {
    Speaker speaker = Speaker::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct ToolDeclaration {
    std::string name;
    std::string description;
    nlohmann::json parameters = nlohmann::json::object();
};

struct ToolCall {
    std::string name;
    nlohmann::json arguments = nlohmann::json::object();

    bool operator==(const ToolCall&) const = default;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    Usage& operator+=(const Usage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

/// Routing key for a call: which agent, which pipeline step, which round.
/// The HTTP backend ignores it; the scripted backend replays by it.
struct RequestKey {
    std::string agent_role;
    int step_index = 0;
    int round = 0;

    auto operator<=>(const RequestKey&) const = default;
};

std::string to_string(const RequestKey& key);

enum class SchemaFamily { Critique, DesignerArtifact, StepPlan };

struct SchemaId {
    SchemaFamily family = SchemaFamily::Critique;
    scoring::ComponentKind kind = scoring::ComponentKind::StateChange;

    /// Stable name, e.g. `critique_state_change`, `step_plan`.
    std::string name() const;

    bool operator==(const SchemaId&) const = default;
};

struct ChatRequest {
    std::string role_prompt;
    std::vector<Message> messages;
    std::optional<SchemaId> required_schema;
    std::vector<ToolDeclaration> tool_declarations;
    RequestKey key;
    double temperature = 0.0;

    /// Throws std::invalid_argument when both a schema and tools are set.
    void validate() const;
};

struct ChatResponse {
    std::string content;
    /// Parsed and schema-checked object when the request named a schema.
    std::optional<nlohmann::json> structured;
    std::vector<ToolCall> tool_calls;
    Usage usage;
    int attempts = 1;
};

class Backend {
public:
    virtual ~Backend() = default;

    /// Raw transport call. Callers go through llm::complete, which enforces
    /// the structured-output contract.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Issues `request`; when it names a schema, the reply is parsed and checked
/// and one corrective re-ask embedding the validation error is made before
/// giving up with SchemaViolation. Usage of both calls is summed.
ChatResponse complete(Backend& backend, const ChatRequest& request);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{8000};
    std::uint64_t jitter_seed = 0x5eed;
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

/// llm::complete with exponential backoff and jitter on retryable errors
/// (TransportError, RateLimited). The last error is rethrown with its
/// attempt count set.
ChatResponse with_retry(Backend& backend, const ChatRequest& request, const RetryPolicy& policy = {});

}  // namespace simforge::llm
