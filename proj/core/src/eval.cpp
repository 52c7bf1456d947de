#include "editforge/eval.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "editforge/error.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

Error data_error(const std::string& message) { return Error(ErrorCategory::data, message); }

int severity(HumanScore s) {
    switch (s) {
        case HumanScore::correct: return 0;
        case HumanScore::partial: return 1;
        case HumanScore::wrong: return 2;
    }
    return 2;
}

Verdict as_binary(HumanScore s) { return s == HumanScore::wrong ? Verdict::no : Verdict::yes; }

std::string random_anon_id(Rng& rng) {
    return fmt::format("s-{:012x}", rng.next() & 0xffffffffffffULL);
}

}  // namespace

std::string_view to_string(Verdict v) noexcept { return v == Verdict::yes ? "yes" : "no"; }

std::string_view to_string(HumanScore s) noexcept {
    switch (s) {
        case HumanScore::correct: return "correct";
        case HumanScore::partial: return "partial";
        case HumanScore::wrong: return "wrong";
    }
    return "wrong";
}

std::optional<HumanScore> parse_human_score(std::string_view name) noexcept {
    for (auto s : {HumanScore::correct, HumanScore::partial, HumanScore::wrong})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

std::vector<EvalSample> read_eval_samples(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
    std::vector<EvalSample> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            EvalSample s{j.at("sample_id").get<std::string>(), j.at("instruction").get<std::string>(),
                         j.at("input").get<std::string>(), j.at("model_output").get<std::string>(),
                         j.at("model_tag").get<std::string>()};
            if (!seen.insert(s.sample_id + "\n" + s.model_tag).second)
                throw data_error("repeated (sample_id, model_tag) " + s.sample_id);
            out.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw data_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::optional<Verdict> parse_verdict(std::string_view response) {
    std::size_t i = 0;
    while (i < response.size()) {
        while (i < response.size() && !std::isalpha(static_cast<unsigned char>(response[i]))) ++i;
        std::size_t start = i;
        while (i < response.size() && std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
        if (i == start) continue;
        const std::string word = text::to_lower(response.substr(start, i - start));
        if (word == "yes") return Verdict::yes;
        if (word == "no") return Verdict::no;
    }
    return std::nullopt;
}

void judge_with_llm(EvalRecord& record, const llm::Orchestrator& orchestrator,
                    llm::ExchangeLog& log) {
    if (text::trim(record.model_output).empty())
        throw ContractViolation("model output is empty for sample " + record.sample_id);
    const std::string prompt = llm::render(orchestrator.prompts().get(llm::PromptKind::judge),
                                           {{"instruction", record.instruction},
                                            {"input", record.input_code},
                                            {"output", record.model_output}});
    const auto& settings = orchestrator.settings();
    for (int attempt = 0; attempt <= settings.max_retries; ++attempt) {
        const auto& ex = orchestrator.call(to_string(llm::PromptKind::judge), prompt,
                                           settings.judge_temperature, attempt, log);
        if (auto v = parse_verdict(ex.response)) {
            record.judge_verdict = *v;
            record.judge_exchange_id = ex.id;
            record.unjudged = false;
            return;
        }
    }
    record.judge_verdict.reset();
    record.judge_exchange_id.reset();
    record.unjudged = true;
    spdlog::warn("sample {} left unjudged: no yes/no in the judge's answers", record.sample_id);
}

EvalReport build_eval_report(const std::vector<EvalRecord>& records,
                             const std::unordered_map<std::string, DiffStats>& reference_diffs) {
    EvalReport r;
    std::array<std::size_t, kEditRatioBins> bin_yes{};
    std::map<int, std::pair<std::size_t, std::size_t>> runs;  // run -> (yes, judged)
    for (const auto& rec : records) {
        if (!rec.judge_verdict) {
            ++r.unjudged;
            continue;
        }
        auto it = reference_diffs.find(rec.sample_id);
        if (it == reference_diffs.end())
            throw data_error("no reference edit for sample " + rec.sample_id);
        const bool yes = *rec.judge_verdict == Verdict::yes;
        const auto bin = static_cast<std::size_t>(it->second.bin - 1);
        ++r.judged;
        r.yes += yes;
        ++r.per_bin_judged[bin];
        bin_yes[bin] += yes;
        auto& run = runs[rec.run];
        run.first += yes;
        ++run.second;
    }
    if (r.judged == 0) throw ContractViolation("no judged records to report on");
    r.overall_accuracy = static_cast<double>(r.yes) / static_cast<double>(r.judged);
    for (std::size_t b = 0; b < kEditRatioBins; ++b) {
        if (r.per_bin_judged[b] > 0)
            r.per_bin_accuracy[b] =
                static_cast<double>(bin_yes[b]) / static_cast<double>(r.per_bin_judged[b]);
    }
    double sum = 0;
    for (const auto& [run, counts] : runs) {
        double acc = static_cast<double>(counts.first) / static_cast<double>(counts.second);
        r.per_run_accuracy[run] = acc;
        sum += acc;
    }
    r.mean_run_accuracy = sum / static_cast<double>(runs.size());
    return r;
}

HumanScore majority_score(const std::vector<HumanScore>& scores) {
    if (scores.empty()) throw ContractViolation("majority of zero scores");
    std::array<std::size_t, 3> counts{};
    for (auto s : scores) ++counts[static_cast<std::size_t>(severity(s))];
    // Scan from worst to best so a tie keeps the worse score.
    std::size_t best = 2;
    for (std::size_t k = 2; k-- > 0;)
        if (counts[k] > counts[best]) best = k;
    static constexpr HumanScore kBySeverity[] = {HumanScore::correct, HumanScore::partial,
                                                 HumanScore::wrong};
    return kBySeverity[best];
}

double human_judge_agreement(const std::vector<EvalRecord>& records) {
    std::size_t considered = 0, hits = 0;
    for (const auto& rec : records) {
        if (!rec.judge_verdict || rec.human_scores.empty()) continue;
        std::vector<HumanScore> scores;
        for (const auto& [_, s] : rec.human_scores) scores.push_back(s);
        ++considered;
        hits += as_binary(majority_score(scores)) == *rec.judge_verdict;
    }
    if (considered == 0)
        throw ContractViolation("no record carries both a judge verdict and human scores");
    return static_cast<double>(hits) / static_cast<double>(considered);
}

EvalSheet EvalSheet::create(const std::vector<EvalSample>& samples, Rng& rng) {
    EvalSheet sheet;
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i : order) {
        const auto& s = samples[i];
        std::string anon;
        do {
            anon = random_anon_id(rng);
        } while (sheet.slot_of_.count(anon));
        EvalRecord rec;
        rec.sample_id = s.sample_id;
        rec.instruction = s.instruction;
        rec.input_code = s.input_code;
        rec.model_output = s.model_output;
        rec.anon_id = anon;
        sheet.slot_of_.emplace(anon, sheet.records_.size());
        sheet.model_of_.emplace(anon, s.model_tag);
        sheet.records_.push_back(std::move(rec));
    }
    return sheet;
}

const EvalRecord* EvalSheet::find(const std::string& anon_id) const {
    auto it = slot_of_.find(anon_id);
    return it == slot_of_.end() ? nullptr : &records_[it->second];
}

EvalRecord* EvalSheet::find(const std::string& anon_id) {
    auto it = slot_of_.find(anon_id);
    return it == slot_of_.end() ? nullptr : &records_[it->second];
}

const std::string& EvalSheet::model_of(const std::string& anon_id) const {
    auto it = model_of_.find(anon_id);
    if (it == model_of_.end()) throw Error(ErrorCategory::not_found, "unknown anon id " + anon_id);
    return it->second;
}

ScoreOutcome EvalSheet::record_scores(const std::vector<ScoreEntry>& entries) {
    ScoreOutcome out;
    for (const auto& e : entries) {
        EvalRecord* rec = find(e.anon_id);
        if (!rec || e.rater.empty()) {
            out.rejected.push_back(e.anon_id);
            continue;
        }
        auto [it, inserted] = rec->human_scores.insert_or_assign(e.rater, e.score);
        ++out.accepted;
        out.replaced += !inserted;
    }
    return out;
}

std::map<std::string, HumanBreakdown> EvalSheet::breakdown() const {
    // model -> rater -> counts per level
    std::map<std::string, std::map<std::string, std::array<std::size_t, 3>>> tally;
    for (const auto& rec : records_) {
        const std::string& model = model_of_.at(rec.anon_id);
        for (const auto& [rater, score] : rec.human_scores)
            ++tally[model][rater][static_cast<std::size_t>(severity(score))];
    }
    std::map<std::string, HumanBreakdown> out;
    for (const auto& [model, raters] : tally) {
        std::array<double, 3> sums{};
        for (const auto& [_, c] : raters) {
            const double n = static_cast<double>(c[0] + c[1] + c[2]);
            for (std::size_t k = 0; k < 3; ++k) sums[k] += static_cast<double>(c[k]) / n;
        }
        const double nr = static_cast<double>(raters.size());
        out[model] = {100.0 * sums[0] / nr, 100.0 * sums[1] / nr, 100.0 * sums[2] / nr};
    }
    return out;
}

std::map<std::string, double> EvalSheet::model_accuracy() const {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& rec : records_) {
        if (!rec.judge_verdict) continue;
        auto& c = counts[model_of_.at(rec.anon_id)];
        c.first += *rec.judge_verdict == Verdict::yes;
        ++c.second;
    }
    std::map<std::string, double> out;
    for (const auto& [model, c] : counts)
        out[model] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return out;
}

nlohmann::json EvalSheet::rater_view(const EvalRecord& record) const {
    return {{"anon_id", record.anon_id},
            {"instruction", record.instruction},
            {"input", record.input_code},
            {"output", record.model_output}};
}

void EvalSheet::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rec : records_) {
        nlohmann::ordered_json scores = nlohmann::ordered_json::object();
        for (const auto& [rater, s] : rec.human_scores) scores[rater] = to_string(s);
        arr.push_back({
            {"anon_id", rec.anon_id},
            {"model_tag", model_of_.at(rec.anon_id)},
            {"sample_id", rec.sample_id},
            {"instruction", rec.instruction},
            {"input", rec.input_code},
            {"model_output", rec.model_output},
            {"judge_verdict", rec.judge_verdict ? nlohmann::ordered_json(to_string(*rec.judge_verdict))
                                                : nlohmann::ordered_json(nullptr)},
            {"judge_exchange_id", rec.judge_exchange_id
                                      ? nlohmann::ordered_json(*rec.judge_exchange_id)
                                      : nlohmann::ordered_json(nullptr)},
            {"unjudged", rec.unjudged},
            {"run", rec.run},
            {"human_scores", scores},
        });
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
        out << arr.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

EvalSheet EvalSheet::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
    EvalSheet sheet;
    try {
        auto arr = nlohmann::json::parse(in);
        for (const auto& j : arr) {
            EvalRecord rec;
            rec.anon_id = j.at("anon_id").get<std::string>();
            rec.sample_id = j.at("sample_id").get<std::string>();
            rec.instruction = j.at("instruction").get<std::string>();
            rec.input_code = j.at("input").get<std::string>();
            rec.model_output = j.at("model_output").get<std::string>();
            if (!j.at("judge_verdict").is_null())
                rec.judge_verdict =
                    j["judge_verdict"] == "yes" ? Verdict::yes : Verdict::no;
            if (!j.at("judge_exchange_id").is_null())
                rec.judge_exchange_id = j["judge_exchange_id"].get<std::string>();
            rec.unjudged = j.at("unjudged").get<bool>();
            rec.run = j.at("run").get<int>();
            for (const auto& [rater, s] : j.at("human_scores").items()) {
                auto score = parse_human_score(s.get<std::string>());
                if (!score) throw data_error("bad human score in " + path.string());
                rec.human_scores[rater] = *score;
            }
            if (sheet.slot_of_.count(rec.anon_id))
                throw data_error("repeated anon id " + rec.anon_id);
            sheet.slot_of_.emplace(rec.anon_id, sheet.records_.size());
            sheet.model_of_.emplace(rec.anon_id, j.at("model_tag").get<std::string>());
            sheet.records_.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed sheet " + path.string() + ": " + e.what());
    }
    return sheet;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["judged"] = r.judged;
    j["yes"] = r.yes;
    j["unjudged"] = r.unjudged;
    j["overall_accuracy"] = r.overall_accuracy;
    auto bins = nlohmann::ordered_json::array();
    for (std::size_t b = 0; b < kEditRatioBins; ++b) {
        bins.push_back({{"bin", b + 1},
                        {"judged", r.per_bin_judged[b]},
                        {"accuracy", r.per_bin_accuracy[b]
                                         ? nlohmann::ordered_json(*r.per_bin_accuracy[b])
                                         : nlohmann::ordered_json(nullptr)}});
    }
    j["per_bin"] = bins;
    auto runs = nlohmann::ordered_json::object();
    for (const auto& [run, acc] : r.per_run_accuracy) runs[std::to_string(run)] = acc;
    j["per_run_accuracy"] = runs;
    j["mean_run_accuracy"] = r.mean_run_accuracy;
    j["per_model_accuracy"] = r.per_model_accuracy;
    auto human = nlohmann::ordered_json::object();
    for (const auto& [model, b] : r.human_breakdown)
        human[model] = {{"correct", b.correct}, {"partial", b.partial}, {"wrong", b.wrong}};
    j["human_breakdown"] = human;
    j["agreement"] = r.agreement ? nlohmann::ordered_json(*r.agreement)
                                 : nlohmann::ordered_json(nullptr);
    return j;
}

std::string format_report(const EvalReport& r) {
    std::string out = fmt::format("judged {}  yes {}  unjudged {}\naccuracy {:.1f}%\n\n", r.judged,
                                  r.yes, r.unjudged, 100.0 * r.overall_accuracy);
    out += fmt::format("{:<6} {:>8} {:>10}\n", "bin", "judged", "accuracy");
    for (std::size_t b = 0; b < kEditRatioBins; ++b) {
        out += fmt::format("{:<6} {:>8} {:>10}\n", b + 1, r.per_bin_judged[b],
                           r.per_bin_accuracy[b] ? fmt::format("{:.1f}%", 100.0 * *r.per_bin_accuracy[b])
                                                 : std::string("-"));
    }
    if (r.per_run_accuracy.size() > 1) {
        out += "\nruns:";
        for (const auto& [run, acc] : r.per_run_accuracy)
            out += fmt::format(" #{} {:.1f}%", run, 100.0 * acc);
        out += fmt::format("  mean {:.1f}%\n", 100.0 * r.mean_run_accuracy);
    }
    if (!r.per_model_accuracy.empty()) {
        out += "\nmodel accuracy:\n";
        for (const auto& [m, acc] : r.per_model_accuracy)
            out += fmt::format("  {:<24} {:.1f}%\n", m, 100.0 * acc);
    }
    if (!r.human_breakdown.empty()) {
        out += fmt::format("\n{:<24} {:>8} {:>8} {:>8}\n", "human scores", "correct", "partial",
                           "wrong");
        for (const auto& [m, b] : r.human_breakdown)
            out += fmt::format("{:<24} {:>7.1f}% {:>7.1f}% {:>7.1f}%\n", m, b.correct, b.partial,
                               b.wrong);
    }
    if (r.agreement) out += fmt::format("\nhuman/judge agreement {:.1f}%\n", 100.0 * *r.agreement);
    return out;
}

}  // namespace editforge
