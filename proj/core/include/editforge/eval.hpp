#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "editforge/diff_metrics.hpp"
#include "editforge/llm/orchestrator.hpp"
#include "editforge/util/rng.hpp"

namespace editforge {

enum class Verdict { yes, no };
enum class HumanScore { correct, partial, wrong };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(HumanScore s) noexcept;
std::optional<HumanScore> parse_human_score(std::string_view name) noexcept;

/// A model edit to evaluate, as read from the samples file.
struct EvalSample {
    std::string sample_id;
    std::string instruction;
    std::string input_code;
    std::string model_output;
    std::string model_tag;
};

/// Reads {sample_id, instruction, input, model_output, model_tag} lines.
std::vector<EvalSample> read_eval_samples(const std::filesystem::path& path);

struct EvalRecord {
    std::string sample_id;
    std::string instruction;
    std::string input_code;
    std::string model_output;
    /// Opaque to raters; the model behind it is known only to the sheet.
    std::string anon_id;
    std::optional<Verdict> judge_verdict;
    std::optional<std::string> judge_exchange_id;
    bool unjudged = false;
    /// Judge pass this verdict came from (0-based).
    int run = 0;
    std::map<std::string, HumanScore> human_scores;  // rater -> score
};

/// The first standalone "yes" or "no" word, case-insensitive.
std::optional<Verdict> parse_verdict(std::string_view response);

/// Renders the judge prompt and parses the verdict, retrying unparseable
/// answers. When no verdict comes back the record is flagged unjudged.
/// Throws ContractViolation for an empty model output.
void judge_with_llm(EvalRecord& record, const llm::Orchestrator& orchestrator,
                    llm::ExchangeLog& log);

struct HumanBreakdown {
    double correct = 0.0;  // percent
    double partial = 0.0;
    double wrong = 0.0;
};

struct EvalReport {
    std::size_t judged = 0;
    std::size_t yes = 0;
    std::size_t unjudged = 0;
    double overall_accuracy = 0.0;
    /// Absent for bins without judged records.
    std::array<std::optional<double>, kEditRatioBins> per_bin_accuracy{};
    std::array<std::size_t, kEditRatioBins> per_bin_judged{};
    std::map<int, double> per_run_accuracy;
    double mean_run_accuracy = 0.0;
    std::map<std::string, double> per_model_accuracy;
    std::map<std::string, HumanBreakdown> human_breakdown;
    std::optional<double> agreement;
};

/// Accuracy over judged records, overall and per edit-ratio bin of each
/// sample's reference edit (looked up in `reference_diffs` by sample id).
/// Throws ContractViolation when nothing was judged and Error{data} when a
/// judged sample has no reference diff.
EvalReport build_eval_report(const std::vector<EvalRecord>& records,
                             const std::unordered_map<std::string, DiffStats>& reference_diffs);

/// Most frequent score; ties go to the worse score.
HumanScore majority_score(const std::vector<HumanScore>& scores);

/// Fraction of records where the judge verdict matches the human majority,
/// counting correct and partial as "yes". Only records carrying both signals
/// take part; throws ContractViolation if there are none.
double human_judge_agreement(const std::vector<EvalRecord>& records);

struct ScoreEntry {
    std::string rater;
    std::string anon_id;
    HumanScore score = HumanScore::wrong;
};

struct ScoreOutcome {
    std::size_t accepted = 0;
    std::size_t replaced = 0;
    std::vector<std::string> rejected;  // unknown anon ids
};

/// Anonymised evaluation sheet: records in a seeded shuffled order, each
/// under a random anon id. The anon id -> model mapping never leaves this
/// object except through save().
class EvalSheet {
public:
    EvalSheet() = default;
    static EvalSheet create(const std::vector<EvalSample>& samples, Rng& rng);

    const std::vector<EvalRecord>& records() const { return records_; }
    std::vector<EvalRecord>& records() { return records_; }
    const EvalRecord* find(const std::string& anon_id) const;
    EvalRecord* find(const std::string& anon_id);
    const std::string& model_of(const std::string& anon_id) const;

    /// Upsert per (rater, anon_id); unknown anon ids are rejected.
    ScoreOutcome record_scores(const std::vector<ScoreEntry>& entries);

    /// Per model: per-level fractions for each rater, averaged over raters,
    /// in percent.
    std::map<std::string, HumanBreakdown> breakdown() const;

    /// Judge accuracy per model over judged records.
    std::map<std::string, double> model_accuracy() const;

    /// What a rater may see: no model field, ever.
    nlohmann::json rater_view(const EvalRecord& record) const;

    void save(const std::filesystem::path& path) const;
    static EvalSheet load(const std::filesystem::path& path);

private:
    std::vector<EvalRecord> records_;
    std::unordered_map<std::string, std::size_t> slot_of_;
    std::unordered_map<std::string, std::string> model_of_;
};

nlohmann::ordered_json to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace editforge
