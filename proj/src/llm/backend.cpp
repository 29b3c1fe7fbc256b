#include "simforge/llm/backend.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <thread>

#include "simforge/errors.hpp"
#include "simforge/llm/schemas.hpp"

namespace simforge::llm {

using nlohmann::json;

std::string_view to_string(Speaker speaker) {
    switch (speaker) {
        case Speaker::User: return "user";
        case Speaker::Assistant: return "assistant";
        case Speaker::Tool: return "tool";
    }
    return "user";
}

std::string to_string(const RequestKey& key) {
    return key.agent_role + "#" + std::to_string(key.step_index) + "." + std::to_string(key.round);
}

std::string SchemaId::name() const {
    switch (family) {
        case SchemaFamily::Critique: return "critique_" + std::string(scoring::to_string(kind));
        case SchemaFamily::DesignerArtifact: return "design_" + std::string(scoring::to_string(kind));
        case SchemaFamily::StepPlan: return "step_plan";
    }
    return "unknown";
}

void ChatRequest::validate() const {
    if (required_schema && !tool_declarations.empty()) {
        throw std::invalid_argument("a request may name a schema or declare tools, not both");
    }
}

namespace {

// Models sometimes wrap JSON in a markdown fence; accept that one shape.
std::string strip_fence(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text.compare(first, 3, "```") != 0) return text;
    auto body = text.find('\n', first);
    auto close = text.rfind("```");
    if (body == std::string::npos || close <= body) return text;
    return text.substr(body + 1, close - body - 1);
}

std::optional<std::string> structured_error(const SchemaId& id, const std::string& content, json& parsed) {
    try {
        parsed = json::parse(strip_fence(content));
    } catch (const json::parse_error& e) {
        return std::string("reply is not valid JSON: ") + e.what();
    }
    return schema_error(id, parsed);
}

}  // namespace

ChatResponse complete(Backend& backend, const ChatRequest& request) {
    request.validate();
    ChatResponse response = backend.complete(request);
    if (response.usage.input_tokens < 0 || response.usage.output_tokens < 0) {
        throw TransportError("backend reported negative token usage");
    }
    if (!request.required_schema) return response;

    const SchemaId& id = *request.required_schema;
    json parsed;
    auto error = structured_error(id, response.content, parsed);
    if (!error) {
        response.structured = std::move(parsed);
        return response;
    }

    ChatRequest reask = request;
    reask.messages.push_back({Speaker::Assistant, response.content});
    reask.messages.push_back({Speaker::User, "Your previous reply did not match the required " + id.name() +
                                                 " schema: " + *error +
                                                 "\nReply again with only the corrected JSON object."});
    ChatResponse second = backend.complete(reask);
    second.usage += response.usage;
    error = structured_error(id, second.content, parsed);
    if (error) {
        throw SchemaViolation(id.name() + " output failed validation after re-ask: " + *error);
    }
    second.structured = std::move(parsed);
    return second;
}

ChatResponse with_retry(Backend& backend, const ChatRequest& request, const RetryPolicy& policy) {
    if (policy.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
    std::mt19937_64 rng(policy.jitter_seed);
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    for (int attempt = 1;; ++attempt) {
        try {
            ChatResponse response = complete(backend, request);
            response.attempts = attempt;
            return response;
        } catch (BackendError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) {
                e.set_attempts(attempt);
                throw;
            }
        }
        auto exp = policy.base_delay * (std::int64_t{1} << std::min(attempt - 1, 20));
        auto capped = std::min<std::chrono::milliseconds>(exp, policy.max_delay);
        auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(capped.count() * jitter(rng)));
        if (policy.sleep) {
            policy.sleep(delay);
        } else {
            std::this_thread::sleep_for(delay);
        }
    }
}

}  // namespace simforge::llm
