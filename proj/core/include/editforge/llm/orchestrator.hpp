#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "editforge/llm/chat.hpp"
#include "editforge/llm/exchange.hpp"
#include "editforge/llm/prompts.hpp"
#include "editforge/miner.hpp"
#include "editforge/util/rng.hpp"

namespace editforge::llm {

// ---------------------------------------------------------------------------
// Response grammars
// ---------------------------------------------------------------------------

/// Items of lines shaped like `12. text` or `12) text`, in order.
std::vector<std::string> parse_numbered_list(std::string_view response);

/// Numbered items when present; otherwise every nonempty line with bullet
/// markers removed. At most `limit` items.
std::vector<std::string> parse_scenarios(std::string_view response, std::size_t limit);

/// Bodies of ``` fenced blocks, in order. An unterminated final fence is
/// ignored.
std::vector<std::string> extract_fenced_blocks(std::string_view response);

/// Collapses whitespace, strips surrounding quotes, list markers and a
/// trailing period, and capitalises the first letter.
std::string normalize_instruction(std::string_view text);

/// First sentence of the first nonempty line, normalised.
std::string clean_rewrite(std::string_view response);

/// The configured label a response names, if exactly one can be identified
/// (case-insensitive exact match, else a unique label mentioned in the text).
std::optional<std::string> match_label(std::string_view response,
                                       const std::vector<std::string>& labels);

/// Best-effort reading of the 27 edit-intent categories; overridable in config.
std::vector<std::string> default_intent_labels();

inline constexpr std::string_view kOtherIntent = "other";

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class InstructionSource { seed_commit, seed_curated, generated };

std::string_view to_string(InstructionSource source) noexcept;

struct PoolInstruction {
    std::string id;
    std::string text;
    InstructionSource source = InstructionSource::seed_commit;
};

/// What the bootstrapper may sample from: held-out test seeds are excluded
/// by the caller.
struct PoolView {
    std::vector<PoolInstruction> seeds;
    std::vector<PoolInstruction> generated;
};

struct InstructionCandidate {
    std::string text;
    InstructionSource source = InstructionSource::generated;
    std::vector<std::string> exemplar_ids;
    std::string exchange_id;
};

struct BootstrapResult {
    std::vector<InstructionCandidate> candidates;
    std::vector<std::string> exemplar_ids;
    std::size_t seed_exemplars = 0;
    std::size_t generated_exemplars = 0;
    std::optional<std::string> intent_hint;
    /// Set when no parseable list came back after all retries.
    std::optional<std::string> failure;
    std::vector<std::string> exchange_ids;
};

struct Scenario {
    std::string text;
    bool selected = false;
};

struct ScenarioResult {
    std::vector<Scenario> scenarios;
    /// Empty when generation degenerated; instance generation still runs.
    std::string selected;
    bool degenerate = false;
    std::vector<std::string> exchange_ids;
};

enum class InstanceDiscard { none, block_count, input_equals_output };

std::string_view to_string(InstanceDiscard reason) noexcept;

struct InstanceResult {
    std::string input_code;
    std::string output_code;
    InstanceDiscard discard = InstanceDiscard::none;
    std::vector<std::string> exchange_ids;

    bool ok() const { return discard == InstanceDiscard::none; }
};

struct RewriteResult {
    /// Empty when the record was parked for manual instruction authoring.
    std::optional<std::string> instruction;
    std::vector<std::string> exchange_ids;

    bool parked() const { return !instruction.has_value(); }
};

struct IntentResult {
    std::string label;
    bool fallback = false;
    std::vector<std::string> exchange_ids;
};

// ---------------------------------------------------------------------------
// Orchestrator
// ---------------------------------------------------------------------------

struct GenerationSettings {
    double generation_temperature = 1.0;
    double judge_temperature = 0.0;
    int max_tokens = 2048;
    int max_retries = 3;
    int transport_retries = 5;
    std::chrono::milliseconds backoff_base{500};
    std::size_t seeds_per_prompt = 7;
    std::size_t generated_per_prompt = 1;
    std::size_t scenarios_per_instruction = 10;
    bool steer_intents = true;
};

/// Drives every LLM-backed step through a ChatClient. Stateless apart from
/// its configuration, so one instance may serve concurrent tasks as long as
/// each task passes its own ExchangeLog and Rng.
class Orchestrator {
public:
    Orchestrator(ChatClient& client, PromptLibrary prompts, GenerationSettings settings,
                 std::vector<std::string> intent_labels = default_intent_labels());

    /// One self-instruct round. Samples seeds_per_prompt seed instructions and
    /// generated_per_prompt generated ones without replacement; with no
    /// generated instructions yet it falls back to all-seed exemplars, and a
    /// short side is topped up from the other. `round` selects the
    /// round-robin steering intent.
    BootstrapResult bootstrap_instructions(const PoolView& pool, Rng& rng, std::size_t round,
                                           ExchangeLog& log) const;

    ScenarioResult generate_scenarios(std::string_view instruction, Rng& rng,
                                      ExchangeLog& log) const;

    InstanceResult generate_instance(std::string_view instruction, std::string_view scenario,
                                     ExchangeLog& log) const;

    RewriteResult rewrite_commit_message(const CommitRecord& record, ExchangeLog& log) const;

    /// Throws ContractViolation for an empty instruction.
    IntentResult classify_intent(std::string_view instruction, ExchangeLog& log) const;

    /// Sends `prompt` with transport-level retries and exponential backoff,
    /// recording the exchange. Throws Error{backend} once transport retries
    /// are exhausted.
    const LLMExchange& call(std::string_view step, std::string prompt, double temperature,
                            int attempt, ExchangeLog& log) const;

    const PromptLibrary& prompts() const { return prompts_; }
    const GenerationSettings& settings() const { return settings_; }
    const std::vector<std::string>& intent_labels() const { return intent_labels_; }

private:
    ChatClient& client_;
    PromptLibrary prompts_;
    GenerationSettings settings_;
    std::vector<std::string> intent_labels_;
};

}  // namespace editforge::llm
