#include "editforge/dataset.hpp"

#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "editforge/error.hpp"
#include "editforge/util/hash.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

constexpr std::string_view kCorpusKeys[] = {
    "id",     "instruction", "scenario", "input",  "output",      "source",
    "n_diff", "r_diff",      "bin",      "intent", "exchange_ids",
};

Error data_error(const std::string& message) { return Error(ErrorCategory::data, message); }

std::string clean_instruction(std::string_view s) { return text::collapse_whitespace(s); }

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw data_error(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::string required_string(const nlohmann::json& j, const char* key) {
    auto v = optional_string(j, key);
    if (!v) throw data_error(std::string("missing field '") + key + "'");
    return *v;
}

nlohmann::ordered_json nullable(const std::optional<std::string>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

llm::InstructionSource to_instruction_source(Source s) {
    switch (s) {
        case Source::github_seed: return llm::InstructionSource::seed_commit;
        case Source::curated_seed: return llm::InstructionSource::seed_curated;
        case Source::generated: return llm::InstructionSource::generated;
    }
    return llm::InstructionSource::generated;
}

}  // namespace

std::string_view to_string(Source source) noexcept {
    switch (source) {
        case Source::github_seed: return "github_seed";
        case Source::curated_seed: return "curated_seed";
        case Source::generated: return "generated";
    }
    return "generated";
}

std::optional<Source> parse_source(std::string_view name) noexcept {
    for (Source s : {Source::github_seed, Source::curated_seed, Source::generated})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

std::string instance_id(std::string_view instruction, std::string_view input_code,
                        std::string_view output_code) {
    return content_id({instruction, input_code, output_code});
}

nlohmann::ordered_json to_corpus_json(const TaskInstance& inst) {
    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["instruction"] = inst.instruction;
    j["scenario"] = nullable(inst.scenario);
    j["input"] = inst.input_code;
    j["output"] = inst.output_code;
    j["source"] = to_string(inst.source);
    j["n_diff"] = inst.diff.n_diff;
    j["r_diff"] = inst.diff.r_diff;
    j["bin"] = inst.diff.bin;
    j["intent"] = nullable(inst.intent);
    j["exchange_ids"] = inst.exchange_ids;
    return j;
}

TaskInstance from_corpus_json(const nlohmann::json& j) {
    if (!j.is_object()) throw data_error("corpus entry must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kCorpusKeys), std::end(kCorpusKeys), key) ==
            std::end(kCorpusKeys))
            throw data_error("unknown field '" + key + "'");
    }
    TaskInstance inst;
    inst.instruction = required_string(j, "instruction");
    inst.input_code = required_string(j, "input");
    inst.output_code = required_string(j, "output");
    const std::string source = required_string(j, "source");
    auto parsed = parse_source(source);
    if (!parsed) throw data_error("unknown source '" + source + "'");
    inst.source = *parsed;
    inst.scenario = optional_string(j, "scenario");
    inst.intent = optional_string(j, "intent");
    if (auto it = j.find("exchange_ids"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw data_error("field 'exchange_ids' must be an array");
        for (const auto& e : *it) {
            if (!e.is_string()) throw data_error("exchange_ids entries must be strings");
            inst.exchange_ids.push_back(e.get<std::string>());
        }
    }
    if (inst.input_code == inst.output_code) throw data_error("input equals output");

    inst.id = instance_id(inst.instruction, inst.input_code, inst.output_code);
    inst.diff = line_diff(inst.input_code, inst.output_code);
    if (auto id = optional_string(j, "id"); id && *id != inst.id)
        throw data_error("id " + *id + " does not match content (expected " + inst.id + ")");
    if (auto it = j.find("n_diff"); it != j.end() && !it->is_null()) {
        if (!it->is_number_unsigned() || it->get<std::size_t>() != inst.diff.n_diff)
            throw data_error("n_diff does not match content for " + inst.id);
    }
    if (auto it = j.find("r_diff"); it != j.end() && !it->is_null()) {
        if (!it->is_number() || std::abs(it->get<double>() - inst.diff.r_diff) > 1e-9)
            throw data_error("r_diff does not match content for " + inst.id);
    }
    if (auto it = j.find("bin"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<int>() != inst.diff.bin)
            throw data_error("bin does not match content for " + inst.id);
    }
    return inst;
}

std::vector<TaskInstance> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
    std::vector<TaskInstance> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(from_corpus_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw data_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw data_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<TaskInstance>& instances) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
        for (const auto& inst : instances) out << to_corpus_json(inst).dump() << '\n';
        if (!out) throw Error(ErrorCategory::io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string_view to_string(RejectReason reason) noexcept {
    switch (reason) {
        case RejectReason::empty_field: return "empty_field";
        case RejectReason::input_equals_output: return "input_equals_output";
        case RejectReason::too_long: return "too_long";
        case RejectReason::instruction_dup: return "instruction_dup";
        case RejectReason::instance_dup: return "instance_dup";
    }
    return "empty_field";
}

std::optional<RejectReason> parse_reject_reason(std::string_view name) noexcept {
    for (auto r : {RejectReason::empty_field, RejectReason::input_equals_output,
                   RejectReason::too_long, RejectReason::instruction_dup,
                   RejectReason::instance_dup})
        if (to_string(r) == name) return r;
    return std::nullopt;
}

std::size_t whitespace_token_count(std::string_view text) {
    return text::split_whitespace(text).size();
}

std::string clean_code(std::string_view code) {
    std::vector<std::string_view> kept;
    for (auto line : text::split_lines(code)) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).substr(0, 3) == "```") continue;
        kept.push_back(line);
    }
    std::size_t begin = 0, end = kept.size();
    while (begin < end && text::trim(kept[begin]).empty()) ++begin;
    while (end > begin && text::trim(kept[end - 1]).empty()) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back('\n');
        out.append(kept[i]);
    }
    return out;
}

TaskPool::TaskPool(PoolConfig config)
    : config_(std::move(config)),
      instruction_index_(config_.rouge_threshold),
      code_index_(config_.code_index) {
    if (!config_.tokenizer) config_.tokenizer = whitespace_token_count;
}

Admission TaskPool::evaluate(const AdmissionCandidate& c) const {
    Admission result;
    const std::string instruction = clean_instruction(c.instruction);
    const std::string input = clean_code(c.input_code);
    const std::string output = clean_code(c.output_code);

    if (instruction.empty() || input.empty() || output.empty()) {
        result.reason = RejectReason::empty_field;
        return result;
    }
    if (input == output) {
        result.reason = RejectReason::input_equals_output;
        return result;
    }
    if (config_.tokenizer(input) > config_.max_tokens ||
        config_.tokenizer(output) > config_.max_tokens) {
        result.reason = RejectReason::too_long;
        return result;
    }
    if (c.source == Source::generated) {
        auto m = instruction_index_.check(instruction);
        if (m.duplicate) {
            result.reason = RejectReason::instruction_dup;
            result.matched_id = m.nearest_id;
            result.score = m.score;
            return result;
        }
    }
    auto cm = code_index_.check(input);
    if (cm.duplicate) {
        result.reason = RejectReason::instance_dup;
        result.matched_id = cm.id;
        result.score = cm.jaccard;
        return result;
    }

    TaskInstance inst;
    inst.id = instance_id(instruction, input, output);
    if (slot_of_.count(inst.id)) {
        // Unreachable in practice: an identical input is always a code dup.
        result.reason = RejectReason::instance_dup;
        result.matched_id = inst.id;
        result.score = 1.0;
        return result;
    }
    inst.instruction = instruction;
    if (c.scenario && !text::trim(*c.scenario).empty())
        inst.scenario = text::collapse_whitespace(*c.scenario);
    inst.input_code = input;
    inst.output_code = output;
    inst.source = c.source;
    inst.diff = line_diff(input, output);
    inst.intent = c.intent;
    inst.exchange_ids = c.exchange_ids;
    result.instance = std::move(inst);
    return result;
}

Admission TaskPool::admit(const AdmissionCandidate& candidate) {
    Admission result = evaluate(candidate);
    if (result.instance) insert(*result.instance);
    return result;
}

void TaskPool::insert(TaskInstance instance, bool index_code) {
    if (index_code) code_index_.insert(instance.id, instance.input_code);
    instruction_index_.add(instance.id, instance.instruction);
    slot_of_.emplace(instance.id, instances_.size());
    instances_.push_back(std::move(instance));
}

void TaskPool::restore(TaskInstance instance, bool held_out) {
    if (instance.input_code == instance.output_code)
        throw data_error("snapshot instance " + instance.id + " has input equal to output");
    if (instance.id != instance_id(instance.instruction, instance.input_code, instance.output_code))
        throw data_error("snapshot instance " + instance.id + " has a stale id");
    if (!(instance.diff == line_diff(instance.input_code, instance.output_code)))
        throw data_error("snapshot instance " + instance.id + " has stale diff statistics");
    if (slot_of_.count(instance.id)) throw data_error("duplicate instance id " + instance.id);
    if (held_out && instance.source != Source::github_seed)
        throw data_error("only github seeds can be held out: " + instance.id);
    const std::string id = instance.id;
    insert(std::move(instance));
    if (held_out) held_out_.insert(id);
}

bool TaskPool::restore_snapshot(std::vector<TaskInstance> instances,
                                const std::unordered_set<std::string>& held_out,
                                std::optional<CodeIndex> saved_index) {
    if (!instances_.empty()) throw ContractViolation("restore_snapshot needs an empty pool");
    bool adopt = false;
    if (saved_index) {
        const auto& a = saved_index->config();
        const auto& b = config_.code_index;
        adopt = a.num_perm == b.num_perm && a.threshold == b.threshold && a.seed == b.seed &&
                saved_index->size() == instances.size();
        for (std::size_t i = 0; adopt && i < instances.size(); ++i)
            adopt = saved_index->contains(instances[i].id);
    }
    if (adopt) code_index_ = std::move(*saved_index);
    for (auto& inst : instances) {
        if (inst.input_code == inst.output_code)
            throw data_error("snapshot instance " + inst.id + " has input equal to output");
        if (inst.id != instance_id(inst.instruction, inst.input_code, inst.output_code))
            throw data_error("snapshot instance " + inst.id + " has a stale id");
        if (!(inst.diff == line_diff(inst.input_code, inst.output_code)))
            throw data_error("snapshot instance " + inst.id + " has stale diff statistics");
        if (slot_of_.count(inst.id)) throw data_error("duplicate instance id " + inst.id);
        const bool hold = held_out.count(inst.id) != 0;
        if (hold && inst.source != Source::github_seed)
            throw data_error("only github seeds can be held out: " + inst.id);
        const std::string id = inst.id;
        insert(std::move(inst), !adopt);
        if (hold) held_out_.insert(id);
    }
    for (const auto& id : held_out)
        if (!slot_of_.count(id)) throw data_error("held-out id " + id + " is not in the snapshot");
    return adopt;
}

InstructionMatch TaskPool::check_instruction(std::string_view instruction) const {
    return instruction_index_.check(clean_instruction(instruction));
}

const TaskInstance* TaskPool::find(const std::string& id) const {
    auto it = slot_of_.find(id);
    return it == slot_of_.end() ? nullptr : &instances_[it->second];
}

void TaskPool::set_held_out(const std::string& id, bool held_out) {
    const TaskInstance* inst = find(id);
    if (!inst) throw Error(ErrorCategory::not_found, "no instance " + id);
    if (!held_out) {
        held_out_.erase(id);
        return;
    }
    if (inst->source != Source::github_seed)
        throw ContractViolation("only github seeds can be held out: " + id);
    held_out_.insert(id);
}

std::vector<std::string> TaskPool::held_out_ids() const {
    std::vector<std::string> out;
    for (const auto& inst : instances_)
        if (held_out_.count(inst.id)) out.push_back(inst.id);
    return out;
}

void TaskPool::set_intent(const std::string& id, std::string intent,
                          const std::vector<std::string>& exchange_ids) {
    auto it = slot_of_.find(id);
    if (it == slot_of_.end()) throw Error(ErrorCategory::not_found, "no instance " + id);
    auto& inst = instances_[it->second];
    inst.intent = std::move(intent);
    inst.exchange_ids.insert(inst.exchange_ids.end(), exchange_ids.begin(), exchange_ids.end());
}

llm::PoolView TaskPool::instruction_view() const {
    llm::PoolView view;
    for (const auto& inst : instances_) {
        if (held_out_.count(inst.id)) continue;
        llm::PoolInstruction pi{inst.id, inst.instruction, to_instruction_source(inst.source)};
        (is_seed(inst.source) ? view.seeds : view.generated).push_back(std::move(pi));
    }
    return view;
}

std::size_t TaskPool::count(Source source) const {
    std::size_t n = 0;
    for (const auto& inst : instances_) n += inst.source == source;
    return n;
}

std::vector<std::string> hold_out_seeds(TaskPool& pool, std::size_t count, Rng& rng) {
    std::vector<std::string> github;
    for (const auto& inst : pool.instances())
        if (inst.source == Source::github_seed && !pool.is_held_out(inst.id))
            github.push_back(inst.id);
    if (count > github.size()) {
        spdlog::warn("asked to hold out {} seeds but only {} github seeds are available", count,
                     github.size());
        count = github.size();
    }
    std::vector<std::string> chosen;
    for (std::size_t i : rng.sample_indices(github.size(), count)) chosen.push_back(github[i]);
    for (const auto& id : chosen) pool.set_held_out(id, true);
    return chosen;
}

DatasetSplits split_dataset(const TaskPool& pool, Rng& rng) {
    DatasetSplits splits;
    std::vector<std::string> rest;
    for (const auto& inst : pool.instances()) {
        if (pool.is_held_out(inst.id))
            splits.test.push_back(inst.id);
        else
            rest.push_back(inst.id);
    }
    if (splits.test.empty()) spdlog::warn("no held-out seeds: the test split is empty");
    rng.shuffle(rest);
    const auto n_train =
        static_cast<std::size_t>(std::floor(kTrainFraction * static_cast<double>(rest.size()) + 0.5));
    splits.train.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
    splits.validation.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
    return splits;
}

nlohmann::ordered_json to_json(const DatasetSplits& splits) {
    nlohmann::ordered_json j;
    j["train"] = splits.train;
    j["validation"] = splits.validation;
    j["test"] = splits.test;
    return j;
}

DatasetSplits splits_from_json(const nlohmann::json& j) {
    try {
        return {j.at("train").get<std::vector<std::string>>(),
                j.at("validation").get<std::vector<std::string>>(),
                j.at("test").get<std::vector<std::string>>()};
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("malformed splits file: ") + e.what());
    }
}

}  // namespace editforge
