#include "editforge/llm/exchange.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "editforge/error.hpp"
#include "editforge/util/clock.hpp"
#include "editforge/util/hash.hpp"

namespace editforge::llm {

const LLMExchange& ExchangeLog::record(std::string step, std::string prompt, std::string response,
                                       std::string model_tag, double temperature, int attempt) {
    LLMExchange e;
    e.id = "ex-" + content_id({step, prompt, response, std::to_string(attempt)});
    e.step = std::move(step);
    e.prompt = std::move(prompt);
    e.response = std::move(response);
    e.model_tag = std::move(model_tag);
    e.temperature = temperature;
    e.attempt = attempt;
    e.timestamp = utc_timestamp();
    entries_.push_back(std::move(e));
    return entries_.back();
}

void ExchangeLog::append(const ExchangeLog& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

void ExchangeLog::write_jsonl(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCategory::io, "cannot append to " + path.string());
    for (const auto& e : entries_) out << nlohmann::json(e).dump() << '\n';
}

void to_json(nlohmann::json& j, const LLMExchange& e) {
    j = nlohmann::json{{"id", e.id},
                       {"step", e.step},
                       {"prompt", e.prompt},
                       {"response", e.response},
                       {"model_tag", e.model_tag},
                       {"temperature", e.temperature},
                       {"attempt", e.attempt},
                       {"timestamp", e.timestamp}};
}

void from_json(const nlohmann::json& j, LLMExchange& e) {
    j.at("id").get_to(e.id);
    j.at("step").get_to(e.step);
    j.at("prompt").get_to(e.prompt);
    j.at("response").get_to(e.response);
    j.at("model_tag").get_to(e.model_tag);
    j.at("temperature").get_to(e.temperature);
    j.at("attempt").get_to(e.attempt);
    e.timestamp = j.value("timestamp", "");
}

}  // namespace editforge::llm
