#include <httplib.h>

#include <nlohmann/json.hpp>

#include "editforge/llm/chat.hpp"

namespace editforge::llm {

HttpChatClient::HttpChatClient(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCategory::config, "llm endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const nlohmann::json body{
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransportError("llm request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("llm backend returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw Error(ErrorCategory::backend,
                    "llm backend rejected request with HTTP " + std::to_string(res->status) +
                        ": " + res->body.substr(0, 200));

    try {
        const auto j = nlohmann::json::parse(res->body);
        ChatResponse out;
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.model_tag = j.value("model", config_.model);
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat completion envelope: ") + e.what());
    }
}

}  // namespace editforge::llm
