#include "simforge/llm/http_backend.hpp"

#include <httplib.h>

#include "simforge/errors.hpp"
#include "simforge/llm/schemas.hpp"

namespace simforge::llm {

using nlohmann::json;

namespace {

// Strict structured-output modes accept only a core subset of JSON Schema;
// bounds are still enforced locally by llm::complete.
void strip_unsupported(json& node) {
    if (node.is_object()) {
        for (const char* key : {"$schema", "title", "minimum", "maximum", "minLength", "maxLength", "minItems",
                                "maxItems", "pattern"}) {
            node.erase(key);
        }
        for (auto& [key, child] : node.items()) {
            if (key != "properties") {
                strip_unsupported(child);
                continue;
            }
            for (auto& [name, prop] : child.items()) strip_unsupported(prop);
        }
    } else if (node.is_array()) {
        for (auto& child : node) strip_unsupported(child);
    }
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("base URL '" + url + "' has no scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

json HttpBackend::request_body(const ChatRequest& request) const {
    json messages = json::array();
    if (!request.role_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.role_prompt}});
    }
    for (const auto& m : request.messages) {
        // Tool results are replayed as user turns; the engine never holds a
        // tool_call_id to answer with.
        if (m.speaker == Speaker::Tool) {
            messages.push_back({{"role", "user"}, {"content", "Tool result:\n" + m.content}});
        } else {
            messages.push_back({{"role", std::string(to_string(m.speaker))}, {"content", m.content}});
        }
    }
    json body = {
        {"model", config_.model},
        {"messages", messages},
        {"temperature", request.temperature},
    };
    if (!request.tool_declarations.empty()) {
        json tools = json::array();
        for (const auto& t : request.tool_declarations) {
            tools.push_back({{"type", "function"},
                             {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
        }
        body["tools"] = tools;
    }
    if (request.required_schema && config_.native_structured_output) {
        json schema = json_schema(*request.required_schema);
        strip_unsupported(schema);
        body["response_format"] = {
            {"type", "json_schema"},
            {"json_schema", {{"name", request.required_schema->name()}, {"schema", schema}, {"strict", true}}},
        };
    }
    return body;
}

ChatResponse HttpBackend::parse_reply(const json& body) {
    ChatResponse response;
    try {
        const json& message = body.at("choices").at(0).at("message");
        if (message.contains("content") && message["content"].is_string()) {
            response.content = message["content"].get<std::string>();
        }
        if (message.contains("tool_calls") && message["tool_calls"].is_array()) {
            for (const auto& call : message["tool_calls"]) {
                ToolCall tc;
                tc.name = call.at("function").at("name").get<std::string>();
                const json& args = call.at("function").value("arguments", json("{}"));
                tc.arguments = args.is_string() ? json::parse(args.get<std::string>()) : args;
                response.tool_calls.push_back(std::move(tc));
            }
        }
        if (body.contains("usage") && body["usage"].is_object()) {
            response.usage.input_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
            response.usage.output_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat-completions reply: ") + e.what());
    }
    return response;
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    request.validate();
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto result = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(),
                              "application/json");
    if (!result) {
        throw TransportError("chat request to " + origin_ + " failed: " + httplib::to_string(result.error()));
    }
    int status = result->status;
    if (status == 429) throw RateLimited("rate limited (HTTP 429): " + result->body);
    if (status >= 500) throw TransportError("server error (HTTP " + std::to_string(status) + "): " + result->body);
    if (status != 200) throw BackendError("request rejected (HTTP " + std::to_string(status) + "): " + result->body);

    json body;
    try {
        body = json::parse(result->body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("reply body is not JSON: ") + e.what());
    }
    return parse_reply(body);
}

}  // namespace simforge::llm
