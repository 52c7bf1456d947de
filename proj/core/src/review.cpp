#include "editforge/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "editforge/diff_metrics.hpp"
#include "editforge/error.hpp"
#include "editforge/util/clock.hpp"
#include "editforge/util/hash.hpp"
#include "editforge/util/text.hpp"

namespace editforge::review {
namespace {

constexpr int kSnapshotVersion = 1;

Error data_error(const std::string& message) { return Error(ErrorCategory::data, message); }

struct FieldSpec {
    const char* name;
    bool required;
    enum Type { text, optional_text, string_list } type;
};

const std::vector<FieldSpec>& fields_for(ItemKind kind) {
    static const std::vector<FieldSpec> seed = {
        {"instruction", true, FieldSpec::text},        {"input", true, FieldSpec::text},
        {"output", true, FieldSpec::text},             {"scenario", false, FieldSpec::optional_text},
        {"intent", false, FieldSpec::optional_text},   {"origin", false, FieldSpec::optional_text},
        {"exchange_ids", false, FieldSpec::string_list},
    };
    static const std::vector<FieldSpec> rewrite = {
        {"instruction", true, FieldSpec::text},
        {"input", true, FieldSpec::text},
        {"output", true, FieldSpec::text},
        {"original_message", false, FieldSpec::optional_text},
        {"repo_id", false, FieldSpec::optional_text},
        {"commit_sha", false, FieldSpec::optional_text},
        {"file_path", false, FieldSpec::optional_text},
        {"exchange_ids", false, FieldSpec::string_list},
    };
    static const std::vector<FieldSpec> eval = {
        {"anon_id", true, FieldSpec::text},
        {"instruction", true, FieldSpec::text},
        {"input", true, FieldSpec::text},
        {"output", true, FieldSpec::text},
    };
    switch (kind) {
        case ItemKind::seed_candidate: return seed;
        case ItemKind::rewrite_confirm: return rewrite;
        case ItemKind::eval_score: return eval;
    }
    return seed;
}

bool reveals_model(std::string_view key) {
    return text::to_lower(key).find("model") != std::string::npos;
}

ItemStatus status_for(Action a) {
    switch (a) {
        case Action::accept: return ItemStatus::accepted;
        case Action::reject: return ItemStatus::rejected;
        case Action::edit: return ItemStatus::edited;
    }
    return ItemStatus::pending;
}

nlohmann::json overlay(nlohmann::json base, const nlohmann::json& edit) {
    for (const auto& [k, v] : edit.items()) base[k] = v;
    return base;
}

nlohmann::json decision_to_json(const Decision& d) {
    nlohmann::json j = {{"item_id", d.item_id},
                        {"reviewer_id", d.reviewer_id},
                        {"action", to_string(d.action)},
                        {"timestamp", d.timestamp}};
    j["edited_payload"] = d.edited_payload ? *d.edited_payload : nlohmann::json(nullptr);
    j["score"] = d.score ? nlohmann::json(to_string(*d.score)) : nlohmann::json(nullptr);
    return j;
}

Decision decision_from_json(const nlohmann::json& j) {
    Decision d;
    d.item_id = j.at("item_id").get<std::string>();
    d.reviewer_id = j.at("reviewer_id").get<std::string>();
    auto action = parse_action(j.at("action").get<std::string>());
    if (!action) throw data_error("unknown action in decision log");
    d.action = *action;
    if (auto it = j.find("edited_payload"); it != j.end() && !it->is_null()) d.edited_payload = *it;
    if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
        auto s = parse_human_score(it->get<std::string>());
        if (!s) throw data_error("unknown score in decision log");
        d.score = *s;
    }
    d.timestamp = j.value("timestamp", "");
    return d;
}

// Reads a JSON-lines log. A torn final line (crash mid-append) is dropped
// with a warning; corruption anywhere else is an error.
std::vector<nlohmann::json> read_log(const std::filesystem::path& path) {
    std::vector<nlohmann::json> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!text::trim(line).empty()) lines.push_back(std::move(line));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            out.push_back(nlohmann::json::parse(lines[i]));
        } catch (const nlohmann::json::exception& e) {
            if (i + 1 == lines.size()) {
                spdlog::warn("{}: ignoring torn final line", path.string());
                break;
            }
            throw data_error(path.string() + ": corrupt line " + std::to_string(i + 1));
        }
    }
    return out;
}

class AppendFile {
public:
    explicit AppendFile(const std::filesystem::path& path) : path_(path) {
        fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0)
            throw Error(ErrorCategory::io, "cannot open " + path.string() + ": " + std::strerror(errno));
    }
    ~AppendFile() {
        if (fd_ >= 0) ::close(fd_);
    }
    AppendFile(const AppendFile&) = delete;
    AppendFile& operator=(const AppendFile&) = delete;

    void append(const nlohmann::json& event) {
        std::string line = event.dump() + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            ssize_t n = ::write(fd_, p, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCategory::io, "write failed on " + path_.string());
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) throw Error(ErrorCategory::io, "fsync failed on " + path_.string());
    }

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

}  // namespace

struct ReviewStore::Logs {
    explicit Logs(const std::filesystem::path& dir)
        : items(dir / "items.jsonl"),
          decisions(dir / "decisions.jsonl"),
          promotions(dir / "promotions.jsonl") {}
    AppendFile items;
    AppendFile decisions;
    AppendFile promotions;
};

std::string_view to_string(ItemKind k) noexcept {
    switch (k) {
        case ItemKind::seed_candidate: return "seed_candidate";
        case ItemKind::rewrite_confirm: return "rewrite_confirm";
        case ItemKind::eval_score: return "eval_score";
    }
    return "seed_candidate";
}

std::string_view to_string(ItemStatus s) noexcept {
    switch (s) {
        case ItemStatus::pending: return "pending";
        case ItemStatus::accepted: return "accepted";
        case ItemStatus::rejected: return "rejected";
        case ItemStatus::edited: return "edited";
    }
    return "pending";
}

std::string_view to_string(Action a) noexcept {
    switch (a) {
        case Action::accept: return "accept";
        case Action::reject: return "reject";
        case Action::edit: return "edit";
    }
    return "accept";
}

std::optional<ItemKind> parse_item_kind(std::string_view s) noexcept {
    for (auto k : {ItemKind::seed_candidate, ItemKind::rewrite_confirm, ItemKind::eval_score})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) noexcept {
    for (auto a : {Action::accept, Action::reject, Action::edit})
        if (to_string(a) == s) return a;
    return std::nullopt;
}

std::vector<std::string> validate_payload(ItemKind kind, const nlohmann::json& payload) {
    std::vector<std::string> problems;
    if (!payload.is_object()) return {"payload: must be a JSON object"};
    const auto& fields = fields_for(kind);
    for (const auto& [key, value] : payload.items()) {
        if (kind == ItemKind::eval_score && reveals_model(key)) {
            problems.push_back(key + ": model identity is not allowed in eval_score payloads");
            continue;
        }
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](const FieldSpec& f) { return key == f.name; });
        if (it == fields.end()) {
            problems.push_back(key + ": unknown field");
            continue;
        }
        switch (it->type) {
            case FieldSpec::text:
                if (!value.is_string() || text::trim(value.get<std::string>()).empty())
                    problems.push_back(key + ": must be a nonempty string");
                break;
            case FieldSpec::optional_text:
                if (!value.is_null() && !value.is_string())
                    problems.push_back(key + ": must be a string or null");
                break;
            case FieldSpec::string_list:
                if (!value.is_array()) {
                    problems.push_back(key + ": must be an array of strings");
                } else {
                    for (const auto& e : value)
                        if (!e.is_string()) {
                            problems.push_back(key + ": must be an array of strings");
                            break;
                        }
                }
                break;
        }
    }
    for (const auto& f : fields)
        if (f.required && !payload.contains(f.name))
            problems.push_back(std::string(f.name) + ": required");
    return problems;
}

std::string item_id_for(ItemKind kind, const nlohmann::json& payload) {
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    return "it-" + content_id({to_string(kind), payload.dump()});
}

nlohmann::json ReviewItem::effective_payload() const {
    if (status == ItemStatus::edited) {
        for (const auto& [_, d] : decisions)
            if (d.action == Action::edit && d.edited_payload) return overlay(payload, *d.edited_payload);
    }
    return payload;
}

ReviewStore::ReviewStore(std::filesystem::path dir, std::size_t snapshot_every)
    : dir_(std::move(dir)), snapshot_every_(snapshot_every == 0 ? 1 : snapshot_every) {
    std::filesystem::create_directories(dir_);
    load();
    logs_ = std::make_unique<Logs>(dir_);
}

ReviewStore::~ReviewStore() {
    try {
        std::unique_lock lock(mu_);
        if (since_snapshot_ > 0) checkpoint_locked();
    } catch (const std::exception& e) {
        spdlog::error("review store: final snapshot failed: {}", e.what());
    }
}

void ReviewStore::load() {
    std::size_t skip_items = 0, skip_decisions = 0, skip_promotions = 0;
    const auto snap_path = dir_ / "snapshot.json";
    if (std::filesystem::exists(snap_path)) {
        std::ifstream in(snap_path, std::ios::binary);
        nlohmann::json snap;
        try {
            snap = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw data_error("corrupt review snapshot " + snap_path.string() + ": " + e.what());
        }
        if (snap.value("version", 0) != kSnapshotVersion)
            throw data_error("unsupported review snapshot version in " + snap_path.string());
        skip_items = snap.at("item_events").get<std::size_t>();
        skip_decisions = snap.at("decision_events").get<std::size_t>();
        skip_promotions = snap.at("promotion_events").get<std::size_t>();
        for (const auto& j : snap.at("items")) {
            ReviewItem it;
            it.item_id = j.at("item_id").get<std::string>();
            it.kind = *parse_item_kind(j.at("kind").get<std::string>());
            it.payload = j.at("payload");
            it.seq = j.at("seq").get<std::uint64_t>();
            for (const auto& d : j.at("decisions")) {
                Decision dec = decision_from_json(d);
                it.decisions.emplace(dec.reviewer_id, std::move(dec));
            }
            const auto status = j.at("status").get<std::string>();
            for (auto s : {ItemStatus::pending, ItemStatus::accepted, ItemStatus::rejected,
                           ItemStatus::edited})
                if (to_string(s) == status) it.status = s;
            const auto& p = j.at("promotion");
            it.promotion.promoted = p.at("promoted").get<bool>();
            if (!p.at("instance_id").is_null())
                it.promotion.instance_id = p["instance_id"].get<std::string>();
            if (!p.at("rejection").is_null())
                it.promotion.rejection = p["rejection"].get<std::string>();
            slot_of_.emplace(it.item_id, items_.size());
            items_.push_back(std::move(it));
        }
        item_events_ = skip_items;
        decision_events_ = skip_decisions;
        promotion_events_ = skip_promotions;
    }
    auto replay = [](const std::vector<nlohmann::json>& events, std::size_t skip, auto&& apply) {
        for (std::size_t i = skip; i < events.size(); ++i) apply(events[i]);
    };
    replay(read_log(dir_ / "items.jsonl"), skip_items,
           [this](const nlohmann::json& e) { apply_enqueue(e); });
    replay(read_log(dir_ / "decisions.jsonl"), skip_decisions,
           [this](const nlohmann::json& e) { apply_decision(e); });
    replay(read_log(dir_ / "promotions.jsonl"), skip_promotions,
           [this](const nlohmann::json& e) { apply_promotion(e); });
}

void ReviewStore::apply_enqueue(const nlohmann::json& e) {
    ++item_events_;
    ReviewItem it;
    it.item_id = e.at("item_id").get<std::string>();
    auto kind = parse_item_kind(e.at("kind").get<std::string>());
    if (!kind) throw data_error("unknown item kind in item log");
    it.kind = *kind;
    it.payload = e.at("payload");
    it.seq = e.at("seq").get<std::uint64_t>();
    if (slot_of_.count(it.item_id)) return;
    slot_of_.emplace(it.item_id, items_.size());
    items_.push_back(std::move(it));
}

void ReviewStore::apply_decision(const nlohmann::json& e) {
    ++decision_events_;
    Decision d = decision_from_json(e);
    auto slot = slot_of_.find(d.item_id);
    if (slot == slot_of_.end()) throw data_error("decision for unknown item " + d.item_id);
    ReviewItem& it = items_[slot->second];
    const Action action = d.action;
    it.decisions.insert_or_assign(d.reviewer_id, std::move(d));
    if (it.kind == ItemKind::eval_score)
        it.status = it.decisions.size() >= kEvalRaters ? ItemStatus::accepted : ItemStatus::pending;
    else
        it.status = status_for(action);
}

void ReviewStore::apply_promotion(const nlohmann::json& e) {
    ++promotion_events_;
    auto slot = slot_of_.find(e.at("item_id").get<std::string>());
    if (slot == slot_of_.end()) throw data_error("promotion of unknown item");
    ReviewItem& it = items_[slot->second];
    it.promotion.promoted = true;
    if (!e.at("instance_id").is_null()) it.promotion.instance_id = e["instance_id"].get<std::string>();
    if (!e.at("rejection").is_null()) it.promotion.rejection = e["rejection"].get<std::string>();
}

EnqueueResult ReviewStore::enqueue(ItemKind kind, const nlohmann::json& payload) {
    auto problems = validate_payload(kind, payload);
    if (!problems.empty())
        throw data_error("invalid " + std::string(to_string(kind)) +
                         " payload: " + text::join(problems, "; "));
    const std::string id = item_id_for(kind, payload);
    std::unique_lock lock(mu_);
    if (slot_of_.count(id)) return {id, false};
    nlohmann::json event = {{"item_id", id},
                            {"kind", to_string(kind)},
                            {"payload", payload},
                            {"seq", items_.size()}};
    logs_->items.append(event);
    apply_enqueue(event);
    ++since_snapshot_;
    maybe_checkpoint_locked();
    return {id, true};
}

ReviewItem ReviewStore::submit(Decision d) {
    if (text::trim(d.reviewer_id).empty()) throw data_error("reviewer_id: required");
    std::unique_lock lock(mu_);
    auto slot = slot_of_.find(d.item_id);
    if (slot == slot_of_.end()) throw Error(ErrorCategory::not_found, "no review item " + d.item_id);
    const ReviewItem& it = items_[slot->second];
    if (it.promotion.promoted)
        throw Error(ErrorCategory::conflict, "item " + d.item_id + " was already promoted");

    if (it.kind == ItemKind::eval_score) {
        if (d.action != Action::accept)
            throw data_error("action: eval_score items take 'accept' with a score");
        if (!d.score) throw data_error("score: required for eval_score items");
        if (d.edited_payload) throw data_error("edited_payload: not allowed for eval_score items");
        if (!it.decisions.count(d.reviewer_id) && it.decisions.size() >= kEvalRaters)
            throw Error(ErrorCategory::conflict,
                        "item " + d.item_id + " already has " + std::to_string(kEvalRaters) +
                            " scores");
    } else {
        if (d.score) throw data_error("score: only eval_score items take a score");
        if (d.action == Action::edit) {
            if (!d.edited_payload || !d.edited_payload->is_object())
                throw data_error("edited_payload: required for an edit");
            auto problems = validate_payload(it.kind, overlay(it.payload, *d.edited_payload));
            if (!problems.empty())
                throw data_error("edited_payload: " + text::join(problems, "; "));
        } else if (d.edited_payload) {
            throw data_error("edited_payload: only allowed with action 'edit'");
        }
        for (const auto& [reviewer, _] : it.decisions) {
            if (reviewer != d.reviewer_id)
                throw Error(ErrorCategory::conflict,
                            "item " + d.item_id + " was already decided by " + reviewer);
        }
    }
    if (d.timestamp.empty()) d.timestamp = utc_timestamp();
    const auto event = decision_to_json(d);
    logs_->decisions.append(event);
    apply_decision(event);
    ++since_snapshot_;
    maybe_checkpoint_locked();
    return items_[slot->second];
}

std::vector<ReviewItem> ReviewStore::pending(std::optional<ItemKind> kind, std::size_t limit,
                                             const std::string& reviewer) const {
    std::shared_lock lock(mu_);
    std::vector<ReviewItem> out;
    for (const auto& it : items_) {
        if (out.size() >= limit) break;
        if (kind && it.kind != *kind) continue;
        if (it.promotion.promoted || it.status != ItemStatus::pending) continue;
        if (!reviewer.empty() && it.decisions.count(reviewer)) continue;
        out.push_back(it);
    }
    return out;
}

std::optional<ReviewItem> ReviewStore::item(const std::string& item_id) const {
    std::shared_lock lock(mu_);
    auto slot = slot_of_.find(item_id);
    if (slot == slot_of_.end()) return std::nullopt;
    return items_[slot->second];
}

std::vector<ReviewItem> ReviewStore::items() const {
    std::shared_lock lock(mu_);
    return items_;
}

ServiceStats ReviewStore::stats() const {
    std::shared_lock lock(mu_);
    ServiceStats s;
    s.items = items_.size();
    s.decisions_logged = decision_events_;
    std::set<std::string> reviewers;
    for (const auto& it : items_) {
        ++s.by_kind[std::string(to_string(it.kind))][std::string(to_string(it.status))];
        if (it.status == ItemStatus::pending && !it.promotion.promoted) ++s.pending;
        if (it.promotion.promoted) {
            if (it.promotion.rejection)
                ++s.promotion_rejected;
            else
                ++s.promoted;
        }
        for (const auto& [r, _] : it.decisions) reviewers.insert(r);
    }
    s.reviewers = reviewers.size();
    return s;
}

PromotionSummary ReviewStore::promote_accepted(TaskPool& pool) {
    std::unique_lock lock(mu_);
    PromotionSummary summary;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const ReviewItem& it = items_[i];
        if (it.kind == ItemKind::eval_score || it.promotion.promoted) continue;
        if (it.status != ItemStatus::accepted && it.status != ItemStatus::edited) continue;
        const nlohmann::json p = it.effective_payload();
        AdmissionCandidate c;
        c.instruction = p.at("instruction").get<std::string>();
        c.input_code = p.at("input").get<std::string>();
        c.output_code = p.at("output").get<std::string>();
        if (auto s = p.find("scenario"); s != p.end() && s->is_string()) c.scenario = s->get<std::string>();
        if (auto s = p.find("intent"); s != p.end() && s->is_string()) c.intent = s->get<std::string>();
        if (auto s = p.find("exchange_ids"); s != p.end())
            c.exchange_ids = s->get<std::vector<std::string>>();
        c.source = it.kind == ItemKind::seed_candidate ? Source::curated_seed : Source::github_seed;

        Admission a = pool.admit(c);
        nlohmann::json event = {{"item_id", it.item_id}};
        if (a.admitted()) {
            event["instance_id"] = a.instance->id;
            event["rejection"] = nullptr;
            ++summary.promoted;
        } else {
            event["instance_id"] = nullptr;
            event["rejection"] = to_string(*a.reason);
            summary.rejected.emplace_back(it.item_id, std::string(to_string(*a.reason)));
        }
        logs_->promotions.append(event);
        apply_promotion(event);
        ++since_snapshot_;
    }
    maybe_checkpoint_locked();
    return summary;
}

void ReviewStore::checkpoint() {
    std::unique_lock lock(mu_);
    checkpoint_locked();
}

void ReviewStore::maybe_checkpoint_locked() {
    if (since_snapshot_ >= snapshot_every_) checkpoint_locked();
}

void ReviewStore::checkpoint_locked() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& it : items_) {
        nlohmann::json decisions = nlohmann::json::array();
        for (const auto& [_, d] : it.decisions) decisions.push_back(decision_to_json(d));
        arr.push_back({
            {"item_id", it.item_id},
            {"kind", to_string(it.kind)},
            {"payload", it.payload},
            {"seq", it.seq},
            {"status", to_string(it.status)},
            {"decisions", decisions},
            {"promotion",
             {{"promoted", it.promotion.promoted},
              {"instance_id", it.promotion.instance_id ? nlohmann::json(*it.promotion.instance_id)
                                                       : nlohmann::json(nullptr)},
              {"rejection", it.promotion.rejection ? nlohmann::json(*it.promotion.rejection)
                                                   : nlohmann::json(nullptr)}}},
        });
    }
    nlohmann::json snap = {{"version", kSnapshotVersion},
                           {"item_events", item_events_},
                           {"decision_events", decision_events_},
                           {"promotion_events", promotion_events_},
                           {"items", arr}};
    const auto path = dir_ / "snapshot.json";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
        out << snap.dump() << '\n';
        if (!out) throw Error(ErrorCategory::io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    since_snapshot_ = 0;
}

nlohmann::json item_to_json(const ReviewItem& item, bool with_decisions) {
    nlohmann::json j = {{"item_id", item.item_id},
                        {"kind", to_string(item.kind)},
                        {"status", to_string(item.status)},
                        {"payload", item.payload}};
    const auto& p = item.payload;
    if (p.contains("input") && p.contains("output") && p["input"].is_string() &&
        p["output"].is_string()) {
        auto d = line_diff(p["input"].get<std::string>(), p["output"].get<std::string>());
        j["diff"] = {{"n_diff", d.n_diff}, {"r_diff", d.r_diff}, {"bin", d.bin}};
    }
    if (item.kind == ItemKind::eval_score) {
        j["scores_received"] = item.decisions.size();
        j["scores_required"] = kEvalRaters;
    }
    if (item.kind != ItemKind::eval_score) {
        j["promotion"] = {{"promoted", item.promotion.promoted},
                          {"instance_id", item.promotion.instance_id
                                              ? nlohmann::json(*item.promotion.instance_id)
                                              : nlohmann::json(nullptr)},
                          {"rejection", item.promotion.rejection
                                            ? nlohmann::json(*item.promotion.rejection)
                                            : nlohmann::json(nullptr)}};
    }
    if (with_decisions) {
        nlohmann::json ds = nlohmann::json::array();
        for (const auto& [_, d] : item.decisions) ds.push_back(decision_to_json(d));
        j["decisions"] = ds;
        if (item.status == ItemStatus::edited) j["effective_payload"] = item.effective_payload();
    }
    return j;
}

std::size_t enqueue_eval_sheet(ReviewStore& store, const EvalSheet& sheet) {
    std::size_t created = 0;
    for (const auto& rec : sheet.records()) {
        auto view = sheet.rater_view(rec);
        created += store.enqueue(ItemKind::eval_score, view).created;
    }
    return created;
}

ScoreOutcome collect_eval_scores(const ReviewStore& store, EvalSheet& sheet) {
    std::vector<ScoreEntry> entries;
    for (const auto& it : store.items()) {
        if (it.kind != ItemKind::eval_score) continue;
        const auto anon = it.payload.at("anon_id").get<std::string>();
        for (const auto& [rater, d] : it.decisions)
            if (d.score) entries.push_back({rater, anon, *d.score});
    }
    return sheet.record_scores(entries);
}

}  // namespace editforge::review
