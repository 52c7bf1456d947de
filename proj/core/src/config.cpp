#include "editforge/config.hpp"

#include <algorithm>
#include <fstream>
#include <type_traits>

#include "editforge/error.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

// One visitor per config section keeps the key names in a single place for
// serialisation, parsing and flag generation.
template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, ThresholdConfig> {
    f("rouge_dup", c.rouge_dup);
    f("jaccard_dup", c.jaccard_dup);
    f("min_stars", c.min_stars);
    f("max_edited_rows", c.max_edited_rows);
    f("max_tokens", c.max_tokens);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, SamplingConfig> {
    f("seeds_per_prompt", c.seeds_per_prompt);
    f("generated_per_prompt", c.generated_per_prompt);
    f("scenarios_per_instruction", c.scenarios_per_instruction);
    f("steer_intents", c.steer_intents);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, MinHashConfig> {
    f("num_perm", c.num_perm);
    f("seed", c.seed);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, LlmConfig> {
    f("backend", c.backend);
    f("endpoint", c.endpoint);
    f("model", c.model);
    f("api_key_env", c.api_key_env);
    f("max_concurrency", c.max_concurrency);
    f("temperature", c.temperature);
    f("judge_temperature", c.judge_temperature);
    f("max_tokens", c.max_tokens);
    f("max_retries", c.max_retries);
    f("transport_retries", c.transport_retries);
    f("backoff_ms", c.backoff_ms);
    f("timeout_s", c.timeout_s);
    f("mock_fixtures", c.mock_fixtures);
    f("mock_fail_after", c.mock_fail_after);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, PathConfig> {
    f("seed_pool", c.seed_pool);
    f("output_dir", c.output_dir);
    f("state_dir", c.state_dir);
    f("prompts_dir", c.prompts_dir);
    f("intent_labels", c.intent_labels);
    f("review_dir", c.review_dir);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, ReviewConfig> {
    f("host", c.host);
    f("port", c.port);
    f("static_dir", c.static_dir);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, MineConfig> {
    f("extension", c.extension);
    f("licenses", c.licenses);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, EvalConfig> {
    f("runs", c.runs);
}

template <class C, class F> void fields(C& c, F&& f) requires std::is_same_v<std::remove_const_t<C>, PipelineConfig> {
    f("seed", c.seed);
    f("target_count", c.target_count);
    f("max_rounds", c.max_rounds);
    f("held_out_count", c.held_out_count);
    f("thresholds", c.thresholds);
    f("sampling", c.sampling);
    f("minhash", c.minhash);
    f("llm", c.llm);
    f("paths", c.paths);
    f("review", c.review);
    f("mine", c.mine);
    f("eval", c.eval);
}

template <class T>
concept Section = requires(T& t) { fields(t, [](const char*, auto&) {}); };

template <class T>
nlohmann::ordered_json encode(const T& v) {
    if constexpr (Section<T>) {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        fields(v, [&](const char* key, const auto& field) { j[key] = encode(field); });
        return j;
    } else {
        return nlohmann::ordered_json(v);
    }
}

Error config_error(const std::string& message) { return Error(ErrorCategory::config, message); }

template <class T>
void decode(const nlohmann::json& j, T& out, const std::string& path) {
    if constexpr (Section<T>) {
        if (!j.is_object()) throw config_error(path + ": expected an object");
        std::vector<std::string> known;
        fields(out, [&](const char* key, auto& field) {
            known.emplace_back(key);
            if (auto it = j.find(key); it != j.end())
                decode(*it, field, path.empty() ? key : path + "." + key);
        });
        for (const auto& [key, _] : j.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw config_error("unknown config key '" + (path.empty() ? key : path + "." + key) +
                                   "'");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) throw config_error(path + ": expected true or false");
        out = j.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!j.is_number_unsigned()) throw config_error(path + ": expected a non-negative integer");
        out = j.get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, double>) {
        if (!j.is_number()) throw config_error(path + ": expected a number");
        out = j.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) throw config_error(path + ": expected a string");
        out = j.get<std::string>();
    } else {
        static_assert(std::is_same_v<T, std::vector<std::string>>);
        if (!j.is_array()) throw config_error(path + ": expected an array of strings");
        out.clear();
        for (const auto& e : j) {
            if (!e.is_string()) throw config_error(path + ": expected an array of strings");
            out.push_back(e.get<std::string>());
        }
    }
}

void flatten(const nlohmann::ordered_json& j, const std::string& prefix,
             std::vector<std::pair<std::string, nlohmann::json>>& out) {
    for (const auto& [key, value] : j.items()) {
        const std::string dotted = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object())
            flatten(value, dotted, out);
        else
            out.emplace_back(dotted, nlohmann::json(value));
    }
}

void check_unit(double v, const char* name, bool allow_zero) {
    if (!(v <= 1.0) || v < 0.0 || (!allow_zero && v == 0.0))
        throw config_error(std::string(name) + " must lie in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
}

}  // namespace

std::filesystem::path PipelineConfig::state_dir() const {
    if (!paths.state_dir.empty()) return paths.state_dir;
    return std::filesystem::path(paths.output_dir) / "state";
}

nlohmann::ordered_json to_json(const PipelineConfig& cfg) { return encode(cfg); }

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    decode(j, cfg, "");
    return cfg;
}

void validate(const PipelineConfig& c) {
    check_unit(c.thresholds.rouge_dup, "thresholds.rouge_dup", false);
    check_unit(c.thresholds.jaccard_dup, "thresholds.jaccard_dup", false);
    if (c.thresholds.max_tokens == 0) throw config_error("thresholds.max_tokens must be positive");
    if (c.thresholds.max_edited_rows == 0)
        throw config_error("thresholds.max_edited_rows must be positive");
    if (c.sampling.seeds_per_prompt + c.sampling.generated_per_prompt < 2)
        throw config_error("sampling.seeds_per_prompt + sampling.generated_per_prompt must be >= 2");
    if (c.sampling.scenarios_per_instruction == 0)
        throw config_error("sampling.scenarios_per_instruction must be positive");
    if (c.minhash.num_perm < 16) throw config_error("minhash.num_perm must be >= 16");
    if (c.llm.backend != "mock" && c.llm.backend != "http")
        throw config_error("llm.backend must be 'mock' or 'http'");
    if (c.llm.backend == "http" && c.llm.endpoint.empty())
        throw config_error("llm.endpoint is required for the http backend");
    if (c.llm.max_concurrency == 0) throw config_error("llm.max_concurrency must be positive");
    if (c.llm.temperature < 0 || c.llm.temperature > 2)
        throw config_error("llm.temperature must lie in [0, 2]");
    if (c.llm.judge_temperature < 0 || c.llm.judge_temperature > 2)
        throw config_error("llm.judge_temperature must lie in [0, 2]");
    if (c.llm.max_tokens == 0) throw config_error("llm.max_tokens must be positive");
    if (c.review.port > 65535) throw config_error("review.port must be <= 65535");
    if (c.eval.runs == 0) throw config_error("eval.runs must be positive");
    if (c.mine.extension.empty()) throw config_error("mine.extension must not be empty");
}

std::vector<std::pair<std::string, nlohmann::json>> config_fields() {
    std::vector<std::pair<std::string, nlohmann::json>> out;
    flatten(to_json(PipelineConfig{}), "", out);
    return out;
}

void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value) {
    nlohmann::json::json_pointer ptr("/" + [&] {
        std::string p = dotted_key;
        std::replace(p.begin(), p.end(), '.', '/');
        return p;
    }());
    const auto defaults = nlohmann::json(to_json(PipelineConfig{}));
    if (!defaults.contains(ptr)) throw config_error("unknown config key '" + dotted_key + "'");
    const auto& proto = defaults.at(ptr);
    nlohmann::json parsed;
    try {
        if (proto.is_string()) {
            parsed = value;
        } else if (proto.is_boolean()) {
            const auto v = text::to_lower(value);
            if (v == "true" || v == "1" || v == "yes") parsed = true;
            else if (v == "false" || v == "0" || v == "no") parsed = false;
            else throw config_error(dotted_key + ": expected true or false");
        } else if (proto.is_number_unsigned()) {
            if (value.empty() || value[0] == '-')
                throw config_error(dotted_key + ": expected a non-negative integer");
            std::size_t used = 0;
            parsed = std::stoull(value, &used);
            if (used != value.size()) throw config_error(dotted_key + ": expected an integer");
        } else if (proto.is_number()) {
            std::size_t used = 0;
            parsed = std::stod(value, &used);
            if (used != value.size()) throw config_error(dotted_key + ": expected a number");
        } else if (proto.is_array()) {
            const auto t = text::trim(value);
            if (!t.empty() && t.front() == '[') {
                parsed = nlohmann::json::parse(t);
            } else {
                parsed = nlohmann::json::array();
                std::size_t start = 0;
                while (start <= value.size()) {
                    auto comma = value.find(',', start);
                    auto part = text::trim(std::string_view(value).substr(
                        start, comma == std::string::npos ? std::string::npos : comma - start));
                    if (!part.empty()) parsed.push_back(std::string(part));
                    if (comma == std::string::npos) break;
                    start = comma + 1;
                }
            }
        }
    } catch (const std::invalid_argument&) {
        throw config_error(dotted_key + ": cannot parse '" + value + "'");
    } catch (const std::out_of_range&) {
        throw config_error(dotted_key + ": value out of range");
    } catch (const nlohmann::json::exception& e) {
        throw config_error(dotted_key + ": " + e.what());
    }
    j[ptr] = parsed;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
    nlohmann::json j = nlohmann::json(to_json(PipelineConfig{}));
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCategory::io, "cannot read config " + path.string());
        nlohmann::json file;
        try {
            file = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("malformed config " + path.string() + ": " + e.what());
        }
        if (!file.is_object()) throw config_error("config must be a JSON object");
        // Decode once on its own so unknown keys are reported against the file.
        (void)config_from_json(file);
        j.merge_patch(file);
    }
    for (const auto& [key, value] : overrides) apply_override(j, key, value);
    PipelineConfig cfg = config_from_json(j);
    validate(cfg);
    return cfg;
}

}  // namespace editforge
