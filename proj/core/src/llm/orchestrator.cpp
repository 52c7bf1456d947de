#include "editforge/llm/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <spdlog/spdlog.h>

#include "editforge/error.hpp"
#include "editforge/util/text.hpp"

namespace editforge::llm {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a leading "12." / "12)" marker plus the whitespace after it, or 0.
std::size_t numbered_prefix(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && is_digit(line[i])) ++i;
    if (i == 0 || i > 4 || i >= line.size()) return 0;
    if (line[i] != '.' && line[i] != ')') return 0;
    ++i;
    if (i >= line.size() || !std::isspace(static_cast<unsigned char>(line[i]))) return 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    return i;
}

std::size_t bullet_prefix(std::string_view line) {
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*' || line[0] == '+') &&
        std::isspace(static_cast<unsigned char>(line[1]))) {
        std::size_t i = 1;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        return i;
    }
    return 0;
}

std::string_view strip_quotes(std::string_view s) {
    static constexpr std::string_view kPairs[] = {"\"\"", "''", "``"};
    bool changed = true;
    while (changed && s.size() >= 2) {
        changed = false;
        for (auto p : kPairs) {
            if (s.front() == p[0] && s.back() == p[1]) {
                s = text::trim(s.substr(1, s.size() - 2));
                changed = true;
            }
        }
    }
    return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_word(std::string_view hay, std::string_view needle) {
    if (needle.empty()) return false;
    for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
         pos = hay.find(needle, pos + 1)) {
        bool left = pos == 0 || !is_word_char(hay[pos - 1]);
        std::size_t end = pos + needle.size();
        bool right = end >= hay.size() || !is_word_char(hay[end]);
        if (left && right) return true;
    }
    return false;
}

std::string label_key(std::string_view s) {
    std::string out = text::to_lower(text::collapse_whitespace(strip_quotes(text::trim(s))));
    while (!out.empty() && (out.back() == '.' || out.back() == ':')) out.pop_back();
    return out;
}

std::string fallback_label(const std::vector<std::string>& labels) {
    for (const auto& l : labels)
        if (label_key(l) == kOtherIntent) return l;
    return std::string(kOtherIntent);
}

std::string format_exemplars(const std::vector<const PoolInstruction*>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + text::collapse_whitespace(items[i]->text);
    }
    return out;
}

}  // namespace

std::vector<std::string> parse_numbered_list(std::string_view response) {
    std::vector<std::string> items;
    for (auto raw : text::split_lines(response)) {
        auto line = text::trim(raw);
        std::size_t skip = numbered_prefix(line);
        if (skip == 0) continue;
        auto item = normalize_instruction(line.substr(skip));
        if (!item.empty()) items.push_back(std::move(item));
    }
    return items;
}

std::vector<std::string> parse_scenarios(std::string_view response, std::size_t limit) {
    std::vector<std::string> numbered;
    std::vector<std::string> plain;
    for (auto raw : text::split_lines(response)) {
        auto line = text::trim(raw);
        if (line.empty()) continue;
        if (std::size_t n = numbered_prefix(line); n > 0) {
            auto item = text::collapse_whitespace(line.substr(n));
            if (!item.empty()) numbered.push_back(std::move(item));
            continue;
        }
        auto item = text::collapse_whitespace(line.substr(bullet_prefix(line)));
        if (!item.empty()) plain.push_back(std::move(item));
    }
    auto& chosen = numbered.empty() ? plain : numbered;
    if (chosen.size() > limit) chosen.resize(limit);
    return std::move(chosen);
}

std::vector<std::string> extract_fenced_blocks(std::string_view response) {
    std::vector<std::string> blocks;
    bool inside = false;
    std::string body;
    for (auto raw : text::split_lines(response)) {
        auto stripped = text::trim(raw);
        if (stripped.substr(0, 3) == "```") {
            if (inside) {
                if (!body.empty() && body.back() == '\n') body.pop_back();
                blocks.push_back(std::move(body));
                body.clear();
            }
            inside = !inside;
            continue;
        }
        if (inside) {
            body.append(raw);
            body.push_back('\n');
        }
    }
    return blocks;
}

std::string normalize_instruction(std::string_view input) {
    std::string_view s = text::trim(input);
    for (;;) {
        std::size_t skip = numbered_prefix(s);
        if (skip == 0) skip = bullet_prefix(s);
        if (skip == 0) break;
        s = text::trim(s.substr(skip));
    }
    s = strip_quotes(s);
    std::string out = text::collapse_whitespace(s);
    while (!out.empty() && out.back() == '.') out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z')
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

std::string clean_rewrite(std::string_view response) {
    std::string_view line;
    for (auto raw : text::split_lines(response)) {
        auto t = text::trim(raw);
        if (t.empty() || t.substr(0, 3) == "```") continue;
        line = t;
        break;
    }
    if (text::starts_with_icase(line, "instruction:")) line = text::trim(line.substr(12));
    line = strip_quotes(line);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        char c = line[i];
        if ((c == '.' || c == '!' || c == '?') && line[i + 1] == ' ') {
            line = line.substr(0, i + 1);
            break;
        }
    }
    return normalize_instruction(line);
}

std::optional<std::string> match_label(std::string_view response,
                                       const std::vector<std::string>& labels) {
    std::string_view first;
    for (auto raw : text::split_lines(response)) {
        auto t = text::trim(raw);
        if (!t.empty()) {
            first = t;
            break;
        }
    }
    if (text::starts_with_icase(first, "category:")) first = text::trim(first.substr(9));
    std::size_t marker = bullet_prefix(first);
    if (marker == 0) marker = numbered_prefix(first);
    first = first.substr(marker);
    const std::string key = label_key(first);
    if (key.empty()) return std::nullopt;
    for (const auto& l : labels)
        if (label_key(l) == key) return l;

    const std::string lowered = text::to_lower(response);
    std::optional<std::string> found;
    for (const auto& l : labels) {
        if (contains_word(lowered, label_key(l))) {
            if (found) return std::nullopt;
            found = l;
        }
    }
    return found;
}

std::vector<std::string> default_intent_labels() {
    return {
        "Add Functionality",       "Optimize Performance",     "Improve Readability",
        "Refactor Code",           "Error Handling",           "Add Documentation",
        "Add Logging",             "Bug Fix",                  "Add Tests",
        "Improve Security",        "Add Type Hints",           "Code Style/Formatting",
        "Remove Redundancy",       "Add Caching",              "Concurrency/Parallelism",
        "Input Validation",        "Dependency Update",        "Configuration Management",
        "Internationalization",    "Improve Compatibility",    "Memory Optimization",
        "API Modification",        "Data Structure Change",    "Improve Maintainability",
        "Add Comments",            "Rename Identifiers",       "Other",
    };
}

std::string_view to_string(InstructionSource source) noexcept {
    switch (source) {
        case InstructionSource::seed_commit: return "seed_commit";
        case InstructionSource::seed_curated: return "seed_curated";
        case InstructionSource::generated: return "generated";
    }
    return "generated";
}

std::string_view to_string(InstanceDiscard reason) noexcept {
    switch (reason) {
        case InstanceDiscard::none: return "none";
        case InstanceDiscard::block_count: return "block_count";
        case InstanceDiscard::input_equals_output: return "input_equals_output";
    }
    return "none";
}

Orchestrator::Orchestrator(ChatClient& client, PromptLibrary prompts, GenerationSettings settings,
                           std::vector<std::string> intent_labels)
    : client_(client),
      prompts_(std::move(prompts)),
      settings_(settings),
      intent_labels_(std::move(intent_labels)) {
    if (intent_labels_.empty()) throw ContractViolation("intent label list is empty");
    if (settings_.max_retries < 0 || settings_.transport_retries < 0)
        throw Error(ErrorCategory::config, "retry counts must be non-negative");
}

const LLMExchange& Orchestrator::call(std::string_view step, std::string prompt,
                                      double temperature, int attempt, ExchangeLog& log) const {
    ChatRequest req{prompt, temperature, settings_.max_tokens};
    for (int t = 0;; ++t) {
        try {
            ChatResponse resp = client_.complete(req);
            return log.record(std::string(step), std::move(prompt), std::move(resp.text),
                              std::move(resp.model_tag), temperature, attempt);
        } catch (const TransportError& e) {
            if (t >= settings_.transport_retries)
                throw Error(ErrorCategory::backend,
                            std::string(step) + ": backend unavailable after " +
                                std::to_string(t + 1) + " attempts: " + e.what());
            auto delay = settings_.backoff_base * (1LL << std::min(t, 6));
            spdlog::warn("{}: transport error ({}), retrying in {} ms", step, e.what(),
                         delay.count());
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
        }
    }
}

BootstrapResult Orchestrator::bootstrap_instructions(const PoolView& pool, Rng& rng,
                                                     std::size_t round,
                                                     ExchangeLog& log) const {
    BootstrapResult result;
    const std::size_t want = settings_.seeds_per_prompt + settings_.generated_per_prompt;

    std::size_t n_gen = std::min(settings_.generated_per_prompt, pool.generated.size());
    std::size_t n_seed = std::min(want - n_gen, pool.seeds.size());
    n_gen = std::min(want - n_seed, pool.generated.size());
    if (n_seed + n_gen == 0) {
        result.failure = "instruction pool is empty";
        return result;
    }

    std::vector<const PoolInstruction*> exemplars;
    for (std::size_t i : rng.sample_indices(pool.seeds.size(), n_seed))
        exemplars.push_back(&pool.seeds[i]);
    for (std::size_t i : rng.sample_indices(pool.generated.size(), n_gen))
        exemplars.push_back(&pool.generated[i]);
    rng.shuffle(exemplars);
    result.seed_exemplars = n_seed;
    result.generated_exemplars = n_gen;
    for (const auto* e : exemplars) result.exemplar_ids.push_back(e->id);

    std::string hint;
    if (settings_.steer_intents) {
        std::vector<const std::string*> steerable;
        for (const auto& l : intent_labels_)
            if (label_key(l) != kOtherIntent) steerable.push_back(&l);
        if (!steerable.empty()) {
            result.intent_hint = *steerable[round % steerable.size()];
            hint = "Focus the new instructions on this kind of edit: " + *result.intent_hint + ".";
        }
    }

    const std::string prompt = render(prompts_.get(PromptKind::instruction_gen),
                                      {{"intent_hint", hint},
                                       {"exemplars", format_exemplars(exemplars)}});
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        const auto& ex = call(to_string(PromptKind::instruction_gen), prompt,
                              settings_.generation_temperature, attempt, log);
        result.exchange_ids.push_back(ex.id);
        auto items = parse_numbered_list(ex.response);
        if (items.empty()) continue;
        for (auto& text : items)
            result.candidates.push_back(
                {std::move(text), InstructionSource::generated, result.exemplar_ids, ex.id});
        return result;
    }
    result.failure = "no numbered instruction list after " +
                     std::to_string(settings_.max_retries + 1) + " attempts";
    spdlog::warn("bootstrap round {} skipped: {}", round, *result.failure);
    return result;
}

ScenarioResult Orchestrator::generate_scenarios(std::string_view instruction, Rng& rng,
                                                ExchangeLog& log) const {
    ScenarioResult result;
    const std::string prompt = render(prompts_.get(PromptKind::scenario_gen),
                                      {{"instruction", std::string(instruction)}});
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        const auto& ex = call(to_string(PromptKind::scenario_gen), prompt,
                              settings_.generation_temperature, attempt, log);
        result.exchange_ids.push_back(ex.id);
        auto items = parse_scenarios(ex.response, settings_.scenarios_per_instruction);
        if (items.empty()) continue;
        std::size_t pick = rng.below(items.size());
        for (std::size_t i = 0; i < items.size(); ++i)
            result.scenarios.push_back({std::move(items[i]), i == pick});
        result.selected = result.scenarios[pick].text;
        return result;
    }
    result.degenerate = true;
    spdlog::warn("no scenarios parsed for instruction '{}'; continuing without one", instruction);
    return result;
}

InstanceResult Orchestrator::generate_instance(std::string_view instruction,
                                               std::string_view scenario,
                                               ExchangeLog& log) const {
    if (text::trim(instruction).empty()) throw ContractViolation("instruction is empty");
    InstanceResult result;
    const std::string prompt =
        render(prompts_.get(PromptKind::instance_gen),
               {{"instruction", std::string(instruction)}, {"scenario", std::string(scenario)}});
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        const auto& ex = call(to_string(PromptKind::instance_gen), prompt,
                              settings_.generation_temperature, attempt, log);
        result.exchange_ids.push_back(ex.id);
        auto blocks = extract_fenced_blocks(ex.response);
        if (blocks.size() != 2) {
            result.discard = InstanceDiscard::block_count;
            continue;
        }
        if (blocks[0] == blocks[1]) {
            result.discard = InstanceDiscard::input_equals_output;
            continue;
        }
        result.input_code = std::move(blocks[0]);
        result.output_code = std::move(blocks[1]);
        result.discard = InstanceDiscard::none;
        return result;
    }
    spdlog::info("instance discarded ({}) for instruction '{}'", to_string(result.discard),
                 instruction);
    return result;
}

RewriteResult Orchestrator::rewrite_commit_message(const CommitRecord& record,
                                                   ExchangeLog& log) const {
    RewriteResult result;
    const std::string prompt = render(prompts_.get(PromptKind::message_rewrite),
                                      {{"file_path", record.file_path},
                                       {"message", text::collapse_whitespace(record.message)},
                                       {"before", record.content_before},
                                       {"after", record.content_after}});
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        const auto& ex = call(to_string(PromptKind::message_rewrite), prompt,
                              settings_.generation_temperature, attempt, log);
        result.exchange_ids.push_back(ex.id);
        auto cleaned = clean_rewrite(ex.response);
        if (cleaned.empty()) continue;
        result.instruction = std::move(cleaned);
        return result;
    }
    spdlog::warn("commit {} parked: empty rewrite", record.commit_sha);
    return result;
}

IntentResult Orchestrator::classify_intent(std::string_view instruction, ExchangeLog& log) const {
    if (text::trim(instruction).empty()) throw ContractViolation("instruction is empty");
    IntentResult result;
    std::string labels;
    for (const auto& l : intent_labels_) labels += "- " + l + "\n";
    if (!labels.empty()) labels.pop_back();
    const std::string prompt =
        render(prompts_.get(PromptKind::intent_classify),
               {{"labels", labels}, {"instruction", text::collapse_whitespace(instruction)}});
    // One re-ask for an off-list answer; the judge temperature keeps it
    // deterministic on real backends too.
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto& ex = call(to_string(PromptKind::intent_classify), prompt,
                              settings_.judge_temperature, attempt, log);
        result.exchange_ids.push_back(ex.id);
        if (auto label = match_label(ex.response, intent_labels_)) {
            result.label = std::move(*label);
            return result;
        }
    }
    result.label = fallback_label(intent_labels_);
    result.fallback = true;
    return result;
}

}  // namespace editforge::llm
