#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "editforge/dedup.hpp"
#include "editforge/diff_metrics.hpp"
#include "editforge/llm/orchestrator.hpp"
#include "editforge/minhash.hpp"
#include "editforge/util/rng.hpp"

namespace editforge {

enum class Source { github_seed, curated_seed, generated };

std::string_view to_string(Source source) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;

inline bool is_seed(Source s) { return s != Source::generated; }

struct TaskInstance {
    std::string id;
    std::string instruction;
    std::optional<std::string> scenario;
    std::string input_code;
    std::string output_code;
    Source source = Source::generated;
    DiffStats diff;
    std::optional<std::string> intent;
    std::vector<std::string> exchange_ids;

    friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// Stable id: a pure function of (instruction, input, output).
std::string instance_id(std::string_view instruction, std::string_view input_code,
                        std::string_view output_code);

/// One corpus line. Keys, in order: id, instruction, scenario, input, output,
/// source, n_diff, r_diff, bin, intent, exchange_ids.
nlohmann::ordered_json to_corpus_json(const TaskInstance& inst);

/// Parses one corpus line. Only instruction, input, output and source are
/// required; derived fields are recomputed, and when present they must agree
/// with the recomputed values. Unknown keys are rejected. Throws Error{data}.
TaskInstance from_corpus_json(const nlohmann::json& j);

/// Reads a JSON-lines corpus (blank lines are skipped). Errors name the line.
std::vector<TaskInstance> read_corpus(const std::filesystem::path& path);

/// Writes atomically (temp file + rename), LF line endings.
void write_corpus(const std::filesystem::path& path, const std::vector<TaskInstance>& instances);

// ---------------------------------------------------------------------------
// Admission
// ---------------------------------------------------------------------------

enum class RejectReason {
    empty_field,
    input_equals_output,
    too_long,
    instruction_dup,
    instance_dup,
};

std::string_view to_string(RejectReason reason) noexcept;
std::optional<RejectReason> parse_reject_reason(std::string_view name) noexcept;

/// Counts tokens in a text; the default splits on whitespace.
using Tokenizer = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view text);

/// Drops markdown fence lines and leading/trailing blank lines. The result
/// has no trailing newline.
std::string clean_code(std::string_view code);

struct AdmissionCandidate {
    std::string instruction;
    std::optional<std::string> scenario;
    std::string input_code;
    std::string output_code;
    Source source = Source::generated;
    std::optional<std::string> intent;
    std::vector<std::string> exchange_ids;
};

struct Admission {
    std::optional<TaskInstance> instance;
    std::optional<RejectReason> reason;
    /// The pool entry that triggered a dup rejection.
    std::optional<std::string> matched_id;
    double score = 0.0;

    bool admitted() const { return instance.has_value(); }
};

struct PoolConfig {
    double rouge_threshold = kRougeDupThreshold;
    CodeIndexConfig code_index;
    std::size_t max_tokens = 1024;
    Tokenizer tokenizer = whitespace_token_count;
};

/// The task pool: admitted instances plus the two dedup indexes that guard
/// admission.
///
/// Single writer. const members may run concurrently with each other but
/// not with admit()/restore()/set_*.
class TaskPool {
public:
    explicit TaskPool(PoolConfig config = {});

    /// Cleans the candidate and runs, in order: empty_field,
    /// input_equals_output, too_long, instruction_dup (generated only) and
    /// instance_dup. Every check runs before anything is inserted, so a
    /// rejection leaves the pool untouched.
    Admission admit(const AdmissionCandidate& candidate);

    /// The same decision admit() would make, without inserting.
    Admission evaluate(const AdmissionCandidate& candidate) const;

    /// Re-inserts an instance from a trusted snapshot, skipping dedup.
    /// Throws Error{data} on a broken invariant or a repeated id.
    void restore(TaskInstance instance, bool held_out = false);

    /// restore() for a whole snapshot. A saved code index is adopted when it
    /// holds exactly the snapshot's ids under the same parameters; otherwise
    /// the index is rebuilt. Returns true when the saved index was adopted.
    bool restore_snapshot(std::vector<TaskInstance> instances,
                          const std::unordered_set<std::string>& held_out,
                          std::optional<CodeIndex> saved_index = std::nullopt);

    InstructionMatch check_instruction(std::string_view instruction) const;

    const std::vector<TaskInstance>& instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }
    const TaskInstance* find(const std::string& id) const;

    bool is_held_out(const std::string& id) const { return held_out_.count(id) != 0; }
    /// Only github_seed instances may be held out.
    void set_held_out(const std::string& id, bool held_out);
    std::vector<std::string> held_out_ids() const;

    /// Also appends the exchanges that produced the label.
    void set_intent(const std::string& id, std::string intent,
                    const std::vector<std::string>& exchange_ids = {});

    /// Instructions available for bootstrapping (held-out seeds excluded).
    llm::PoolView instruction_view() const;

    std::size_t count(Source source) const;

    const PoolConfig& config() const { return config_; }
    const CodeIndex& code_index() const { return code_index_; }

private:
    void insert(TaskInstance instance, bool index_code = true);

    PoolConfig config_;
    std::vector<TaskInstance> instances_;
    std::unordered_map<std::string, std::size_t> slot_of_;
    std::unordered_set<std::string> held_out_;
    InstructionIndex instruction_index_;
    CodeIndex code_index_;
};

/// Chooses `count` github_seed instances uniformly at random (in pool order,
/// seeded) and flags them held out. Returns the chosen ids.
std::vector<std::string> hold_out_seeds(TaskPool& pool, std::size_t count, Rng& rng);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

inline constexpr double kTrainFraction = 0.95;

struct DatasetSplits {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

/// Held-out seeds go to test; the rest are shuffled and split 95/5 into
/// train and validation (train gets round(0.95·n)).
DatasetSplits split_dataset(const TaskPool& pool, Rng& rng);

nlohmann::ordered_json to_json(const DatasetSplits& splits);
DatasetSplits splits_from_json(const nlohmann::json& j);

}  // namespace editforge
