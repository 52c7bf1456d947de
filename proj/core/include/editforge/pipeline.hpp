#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "editforge/config.hpp"
#include "editforge/dataset.hpp"
#include "editforge/eval.hpp"
#include "editforge/llm/chat.hpp"
#include "editforge/llm/orchestrator.hpp"
#include "editforge/miner.hpp"
#include "editforge/review.hpp"
#include "editforge/stats.hpp"

namespace editforge {

// Wiring from config to components.

/// The mock backend answers from fixtures first and the synthetic responder
/// second; the http backend reads its key from llm.api_key_env. Either way
/// the result is wrapped in the in-flight bound.
std::shared_ptr<llm::ChatClient> make_chat_client(const PipelineConfig& cfg);

llm::PromptLibrary load_prompts(const PipelineConfig& cfg);
std::vector<std::string> load_intent_labels(const PipelineConfig& cfg);
llm::GenerationSettings generation_settings(const PipelineConfig& cfg);
PoolConfig pool_config(const PipelineConfig& cfg);
FilterConfig filter_config(const PipelineConfig& cfg);

struct SeedLoad {
    std::size_t loaded = 0;
    std::size_t rejected = 0;
    std::map<std::string, std::size_t> rejected_by_reason;
    std::vector<std::string> held_out;
};

/// Admits every seed in the configured seed pool file (dedup applies) and
/// holds out `held_out_count` github seeds. Non-seed sources are an error.
SeedLoad load_seed_pool(const PipelineConfig& cfg, TaskPool& pool);

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

/// Cumulative counters of a run, carried across resumes.
struct RunCounters {
    std::size_t rounds = 0;
    std::size_t rounds_failed = 0;
    std::size_t candidates = 0;
    std::size_t admitted = 0;
    std::map<std::string, std::size_t> rejected;
    std::size_t degenerate_scenarios = 0;
    std::size_t intents_classified = 0;
    std::size_t intent_fallbacks = 0;
    std::size_t exchanges = 0;

    std::size_t rejected_total() const;
};

struct RunReport {
    std::size_t target_count = 0;
    std::size_t seeds_loaded = 0;
    std::size_t seeds_rejected = 0;
    std::size_t held_out = 0;
    RunCounters counters;
    /// Round this invocation resumed from (0 for a fresh start).
    std::size_t resumed_at_round = 0;
    bool target_reached = false;
    std::map<std::string, std::size_t> pool_by_source;
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

/// Deterministic: no timestamps and nothing that depends on where a run
/// was interrupted.
nlohmann::ordered_json to_json(const RunReport& report);

/// Bootstrap, scenario, instance and admission rounds until the pool holds
/// `target_count` instances or `max_rounds` rounds have run; then intent
/// classification, split, stats and export into paths.output_dir.
///
/// State is saved under the state dir after every round. A backend failure
/// propagates as Error{backend} and the next call resumes after the last
/// completed round; with the mock backend the final outputs match an
/// uninterrupted run.
RunReport run_pipeline(const PipelineConfig& cfg, llm::ChatClient& client);

// ---------------------------------------------------------------------------
// Stage entry points used by the CLI subcommands
// ---------------------------------------------------------------------------

struct MineReport {
    std::size_t records = 0;
    std::size_t kept = 0;
    std::map<std::string, std::size_t> dropped;
    std::size_t rewritten = 0;
    std::size_t parked = 0;
    std::size_t enqueued = 0;
};

nlohmann::ordered_json to_json(const MineReport& report);

/// Ingests each repository, applies the auto filters and rewrites kept
/// commit messages into instructions. Writes mined.jsonl (rewrite_confirm
/// payloads) and parked.jsonl (records needing a hand-written instruction)
/// to the output dir, and enqueues rewrite_confirm items when `store` is
/// given.
MineReport mine_repositories(const PipelineConfig& cfg,
                             const std::vector<std::filesystem::path>& repos,
                             llm::ChatClient& client, review::ReviewStore* store);

/// One bootstrap round over the seed pool (and `extra` corpus, if any).
/// Writes instructions.jsonl and returns the candidates.
llm::BootstrapResult bootstrap_once(const PipelineConfig& cfg, llm::ChatClient& client,
                                    std::size_t round,
                                    const std::optional<std::filesystem::path>& extra);

struct GenerateReport {
    std::size_t instructions = 0;
    std::size_t admitted = 0;
    std::map<std::string, std::size_t> rejected;
    std::size_t enqueued = 0;
};

nlohmann::ordered_json to_json(const GenerateReport& report);

/// Scenario and instance generation for each instruction in a text file
/// (one per line) or an instructions.jsonl. Results are admitted against
/// the seed pool and written to generated.jsonl; with a store they are also
/// enqueued as seed_candidate items for curation.
GenerateReport generate_from_instructions(const PipelineConfig& cfg, llm::ChatClient& client,
                                          const std::filesystem::path& instructions,
                                          review::ReviewStore* store);

/// stats.json and stats.txt for a corpus file, written to the output dir.
CorpusStats analyze_corpus(const PipelineConfig& cfg, const std::filesystem::path& corpus);

/// splits.json for a corpus file. Held-out ids come from `held_out` (a JSON
/// array) when given, else held_out_count github seeds are drawn.
DatasetSplits split_corpus(const PipelineConfig& cfg, const std::filesystem::path& corpus,
                           const std::optional<std::filesystem::path>& held_out);

/// Writes train.jsonl, validation.jsonl and test.jsonl.
void export_splits(const std::vector<TaskInstance>& instances, const DatasetSplits& splits,
                   const std::filesystem::path& dir);

struct JudgeOptions {
    std::filesystem::path samples;
    /// Corpus whose ids are the sample ids; supplies the per-bin edit ratio.
    std::filesystem::path reference;
    /// Queue the anonymised sheet for human scoring.
    bool enqueue_review = false;
    /// Pull human scores from the review store into the sheet.
    bool collect_review = false;
};

/// LLM-judges every sample eval.runs times and reports accuracy overall,
/// per bin, per run and per model. Saves eval_sheet.json and
/// eval_report.json in the output dir; human scores and agreement are added
/// when collected.
EvalReport judge_samples(const PipelineConfig& cfg, llm::ChatClient& client,
                         const JudgeOptions& options, review::ReviewStore* store);

}  // namespace editforge
