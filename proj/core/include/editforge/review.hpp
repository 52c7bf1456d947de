#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "editforge/dataset.hpp"
#include "editforge/eval.hpp"

namespace editforge::review {

enum class ItemKind { seed_candidate, rewrite_confirm, eval_score };
enum class ItemStatus { pending, accepted, rejected, edited };
enum class Action { accept, reject, edit };

std::string_view to_string(ItemKind k) noexcept;
std::string_view to_string(ItemStatus s) noexcept;
std::string_view to_string(Action a) noexcept;
std::optional<ItemKind> parse_item_kind(std::string_view s) noexcept;
std::optional<Action> parse_action(std::string_view s) noexcept;

/// Distinct reviewers needed before an eval_score item counts as decided.
inline constexpr std::size_t kEvalRaters = 3;

/// Field-level schema check for a payload of the given kind. Returns the
/// problems found; empty means valid. eval_score payloads must not carry
/// any model-identifying field.
std::vector<std::string> validate_payload(ItemKind kind, const nlohmann::json& payload);

/// Content hash of kind and canonical payload.
std::string item_id_for(ItemKind kind, const nlohmann::json& payload);

struct Decision {
    std::string item_id;
    std::string reviewer_id;
    Action action = Action::accept;
    std::optional<nlohmann::json> edited_payload;
    std::optional<HumanScore> score;
    std::string timestamp;
};

struct PromotionState {
    bool promoted = false;
    std::optional<std::string> instance_id;
    std::optional<std::string> rejection;  // admission rejection reason
};

struct ReviewItem {
    std::string item_id;
    ItemKind kind = ItemKind::seed_candidate;
    nlohmann::json payload;
    ItemStatus status = ItemStatus::pending;
    std::uint64_t seq = 0;
    /// Current decision per reviewer (the log keeps every submission).
    std::map<std::string, Decision> decisions;
    PromotionState promotion;

    /// Payload with the deciding reviewer's edit applied, if any.
    nlohmann::json effective_payload() const;
};

struct EnqueueResult {
    std::string item_id;
    bool created = false;
};

struct PromotionSummary {
    std::size_t promoted = 0;
    std::vector<std::pair<std::string, std::string>> rejected;  // (item_id, reason)
};

struct ServiceStats {
    std::size_t items = 0;
    std::size_t pending = 0;
    std::size_t decisions_logged = 0;
    std::size_t promoted = 0;
    std::size_t promotion_rejected = 0;
    std::map<std::string, std::map<std::string, std::size_t>> by_kind;  // kind -> status -> n
    std::size_t reviewers = 0;
};

/// Review queue with durable state: append-only item, decision and
/// promotion logs under `dir`, plus a periodic snapshot. Reopening the
/// directory replays the logs past the snapshot and rebuilds the exact
/// state.
///
/// Thread-safe: reads share a lock, every write goes through one writer.
class ReviewStore {
public:
    explicit ReviewStore(std::filesystem::path dir, std::size_t snapshot_every = 64);
    ~ReviewStore();

    ReviewStore(const ReviewStore&) = delete;
    ReviewStore& operator=(const ReviewStore&) = delete;

    /// Throws Error{data} listing every schema problem.
    EnqueueResult enqueue(ItemKind kind, const nlohmann::json& payload);

    /// Throws Error{not_found} for an unknown item, Error{data} for a
    /// malformed decision, Error{conflict} when another reviewer already
    /// decided a single-review item or the item was already promoted.
    ReviewItem submit(Decision decision);

    /// Items still awaiting `reviewer` (or anyone, when empty), in enqueue
    /// order.
    std::vector<ReviewItem> pending(std::optional<ItemKind> kind, std::size_t limit,
                                    const std::string& reviewer = {}) const;

    std::optional<ReviewItem> item(const std::string& item_id) const;
    std::vector<ReviewItem> items() const;
    ServiceStats stats() const;

    /// Admits every accepted or edited seed_candidate (as curated_seed) and
    /// rewrite_confirm (as github_seed) not yet promoted. Admission
    /// rejections are recorded on the item.
    PromotionSummary promote_accepted(TaskPool& pool);

    /// Writes a snapshot now.
    void checkpoint();

    const std::filesystem::path& dir() const { return dir_; }

private:
    struct Logs;

    void apply_enqueue(const nlohmann::json& event);
    void apply_decision(const nlohmann::json& event);
    void apply_promotion(const nlohmann::json& event);
    void maybe_checkpoint_locked();
    void checkpoint_locked();
    void load();

    std::filesystem::path dir_;
    std::size_t snapshot_every_;
    mutable std::shared_mutex mu_;
    std::vector<ReviewItem> items_;
    std::unordered_map<std::string, std::size_t> slot_of_;
    std::size_t item_events_ = 0;
    std::size_t decision_events_ = 0;
    std::size_t promotion_events_ = 0;
    std::size_t since_snapshot_ = 0;
    std::unique_ptr<Logs> logs_;
};

/// JSON for API responses. eval_score items expose only the anonymised
/// payload. Includes line-diff statistics of the payload's input/output.
nlohmann::json item_to_json(const ReviewItem& item, bool with_decisions = false);

/// Enqueues one eval_score item per sheet record (anonymised view only).
std::size_t enqueue_eval_sheet(ReviewStore& store, const EvalSheet& sheet);

/// Copies every eval_score decision's score into the sheet.
ScoreOutcome collect_eval_scores(const ReviewStore& store, EvalSheet& sheet);

}  // namespace editforge::review
