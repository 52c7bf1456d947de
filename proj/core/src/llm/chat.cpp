#include "editforge/llm/chat.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "editforge/util/hash.hpp"

namespace editforge::llm {

std::string MockChatClient::prompt_key(std::string_view prompt) { return sha256_hex(prompt); }

void MockChatClient::set_response(std::string_view prompt, std::string response) {
    set_response_for_key(prompt_key(prompt), std::move(response));
}

void MockChatClient::set_response_for_key(std::string key, std::string response) {
    std::lock_guard lock(mu_);
    responses_[std::move(key)] = std::move(response);
}

void MockChatClient::load_fixtures(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCategory::io, "cannot read mock fixtures " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::data, path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCategory::data, path.string() + ": expected an object");
    for (auto& [key, value] : j.items()) set_response_for_key(key, value.get<std::string>());
}

ChatResponse MockChatClient::complete(const ChatRequest& request) {
    const std::size_t n = ++calls_;
    if (fail_after_ && n > *fail_after_)
        throw TransportError("mock backend unavailable (call " + std::to_string(n) + ")");
    const std::string key = prompt_key(request.prompt);
    {
        std::lock_guard lock(mu_);
        if (auto it = responses_.find(key); it != responses_.end())
            return {it->second, "mock"};
    }
    if (fallback_) return {fallback_(request.prompt), "mock"};
    return {"", "mock"};
}

ThrottledChatClient::ThrottledChatClient(std::shared_ptr<ChatClient> inner,
                                         std::ptrdiff_t max_concurrency)
    : inner_(std::move(inner)), slots_(max_concurrency < 1 ? 1 : max_concurrency) {}

ChatResponse ThrottledChatClient::complete(const ChatRequest& request) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(request);
}

}  // namespace editforge::llm
