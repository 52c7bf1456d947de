#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace editforge {

struct ThresholdConfig {
    double rouge_dup = 0.7;
    double jaccard_dup = 0.75;
    std::uint64_t min_stars = 100;
    std::uint64_t max_edited_rows = 100;
    std::uint64_t max_tokens = 1024;
};

struct SamplingConfig {
    std::uint64_t seeds_per_prompt = 7;
    std::uint64_t generated_per_prompt = 1;
    std::uint64_t scenarios_per_instruction = 10;
    bool steer_intents = true;
};

struct MinHashConfig {
    std::uint64_t num_perm = 128;
    std::uint64_t seed = 1;
};

struct LlmConfig {
    /// "mock" or "http".
    std::string backend = "mock";
    std::string endpoint;
    std::string model;
    /// Environment variable holding the API key.
    std::string api_key_env = "EDITFORGE_LLM_API_KEY";
    std::uint64_t max_concurrency = 4;
    double temperature = 1.0;
    double judge_temperature = 0.0;
    std::uint64_t max_tokens = 2048;
    std::uint64_t max_retries = 3;
    std::uint64_t transport_retries = 5;
    std::uint64_t backoff_ms = 500;
    std::uint64_t timeout_s = 120;
    /// Mock only: JSON object of prompt-hash -> response, consulted before
    /// the synthetic responder.
    std::string mock_fixtures;
    /// Mock only: fail every call after this many (0 = never). For testing
    /// abort and resume.
    std::uint64_t mock_fail_after = 0;
};

struct PathConfig {
    std::string seed_pool = "seeds.jsonl";
    std::string output_dir = "out";
    /// Resumable run state; defaults to <output_dir>/state when empty.
    std::string state_dir;
    /// Directory of <kind>.txt prompt overrides (optional).
    std::string prompts_dir;
    /// Intent label list, one per line (optional).
    std::string intent_labels;
    std::string review_dir = "review";
};

struct ReviewConfig {
    std::string host = "127.0.0.1";
    std::uint64_t port = 8080;
    std::string static_dir;
};

struct MineConfig {
    std::string extension = ".py";
    /// Empty means the built-in permissive list.
    std::vector<std::string> licenses;
};

struct EvalConfig {
    std::uint64_t runs = 1;
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::uint64_t target_count = 200;
    std::uint64_t max_rounds = 100;
    /// github seeds reserved for the test split.
    std::uint64_t held_out_count = 0;
    ThresholdConfig thresholds;
    SamplingConfig sampling;
    MinHashConfig minhash;
    LlmConfig llm;
    PathConfig paths;
    ReviewConfig review;
    MineConfig mine;
    EvalConfig eval;

    std::filesystem::path state_dir() const;
};

nlohmann::ordered_json to_json(const PipelineConfig& cfg);

/// Unknown keys and wrongly typed values raise Error{config}.
PipelineConfig config_from_json(const nlohmann::json& j);

/// Throws Error{config} when a value is outside its documented range.
void validate(const PipelineConfig& cfg);

/// Every leaf of the config as (dotted.key, default value), in declaration
/// order; used to generate one command-line flag per field.
std::vector<std::pair<std::string, nlohmann::json>> config_fields();

/// Sets one dotted key from command-line text, converting to the field's type.
void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value);

/// Defaults, then the file (if given), then overrides; validated.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace editforge
