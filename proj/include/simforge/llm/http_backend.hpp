#pragma once

#include <chrono>
#include <nlohmann/json.hpp>
#include <string>

#include "simforge/llm/backend.hpp"

namespace simforge::llm {

struct HttpBackendConfig {
    /// e.g. `https://api.openai.com/v1` or `http://127.0.0.1:8080/v1`
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "gpt-4o";
    std::chrono::seconds timeout{120};
    /// Send `response_format: json_schema` for structured requests.
    bool native_structured_output = true;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ChatResponse complete(const ChatRequest& request) override;

    /// Wire body for `request` (exposed for tests).
    nlohmann::json request_body(const ChatRequest& request) const;

    /// Decodes a chat-completions reply. Throws TransportError on a malformed body.
    static ChatResponse parse_reply(const nlohmann::json& body);

private:
    HttpBackendConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace simforge::llm
