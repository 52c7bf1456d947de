#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>

#include "editforge/error.hpp"

namespace editforge::llm {

struct ChatRequest {
    std::string prompt;
    double temperature = 1.0;
    int max_tokens = 2048;
};

struct ChatResponse {
    std::string text;
    std::string model_tag;
};

/// Connection-level failure (network, HTTP 5xx/429, malformed envelope).
/// Callers retry these with backoff; content problems are not transport errors.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& message)
        : Error(ErrorCategory::backend, message) {}
};

/// Single-turn chat completion.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Deterministic offline backend: the response is looked up by the SHA-256
/// of the rendered prompt. Unknown prompts go to the fallback responder when
/// one is set, otherwise they get an empty response.
class MockChatClient : public ChatClient {
public:
    using Responder = std::function<std::string(std::string_view prompt)>;

    MockChatClient() = default;
    explicit MockChatClient(Responder fallback) : fallback_(std::move(fallback)) {}

    static std::string prompt_key(std::string_view prompt);

    void set_response(std::string_view prompt, std::string response);
    void set_response_for_key(std::string key, std::string response);

    /// JSON object mapping prompt keys to response strings.
    void load_fixtures(const std::filesystem::path& path);

    void set_fallback(Responder fallback) { fallback_ = std::move(fallback); }

    /// Every call after the first `n` throws TransportError (for abort/resume tests).
    void fail_after(std::size_t n) { fail_after_ = n; }

    std::size_t calls() const { return calls_.load(); }

    ChatResponse complete(const ChatRequest& request) override;

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::string> responses_;
    Responder fallback_;
    std::optional<std::size_t> fail_after_;
    std::atomic<std::size_t> calls_{0};
};

struct HttpBackendConfig {
    /// OpenAI-compatible chat completions URL, e.g.
    /// https://api.example.com/v1/chat/completions
    std::string endpoint;
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{120};
};

inline constexpr std::string_view kApiKeyEnv = "EDITFORGE_LLM_API_KEY";

/// Chat-completions client over HTTP(S). Posts
/// {"model", "messages": [{"role": "user", "content": prompt}], "temperature",
/// "max_tokens"} and reads choices[0].message.content.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpBackendConfig config);
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

/// Caps the number of in-flight requests to the wrapped client.
class ThrottledChatClient : public ChatClient {
public:
    ThrottledChatClient(std::shared_ptr<ChatClient> inner, std::ptrdiff_t max_concurrency);
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatClient> inner_;
    std::counting_semaphore<> slots_;
};

}  // namespace editforge::llm
