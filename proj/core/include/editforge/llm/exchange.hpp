#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace editforge::llm {

/// One prompt/response round trip. The id is a content hash of
/// (step, prompt, response, attempt), so it is reproducible across runs; the
/// timestamp is informational only.
struct LLMExchange {
    std::string id;
    std::string step;
    std::string prompt;
    std::string response;
    std::string model_tag;
    double temperature = 0.0;
    int attempt = 0;
    std::string timestamp;
};

void to_json(nlohmann::json& j, const LLMExchange& e);
void from_json(const nlohmann::json& j, LLMExchange& e);

/// Append-only, not synchronised: each task owns its own log and the driver
/// merges them in a deterministic order.
class ExchangeLog {
public:
    const LLMExchange& record(std::string step, std::string prompt, std::string response,
                              std::string model_tag, double temperature, int attempt);

    void append(const ExchangeLog& other);
    const std::vector<LLMExchange>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

    /// Appends entries as JSON lines.
    void write_jsonl(const std::filesystem::path& path) const;

private:
    std::vector<LLMExchange> entries_;
};

}  // namespace editforge::llm
