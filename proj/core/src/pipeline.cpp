#include "editforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "editforge/error.hpp"
#include "editforge/llm/synthetic.hpp"
#include "editforge/util/hash.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace fs = std::filesystem;

namespace {

constexpr int kStateVersion = 1;

Error io_error(const std::string& message) { return Error(ErrorCategory::io, message); }
Error data_error(const std::string& message) { return Error(ErrorCategory::data, message); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

template <class J>
void write_json(const fs::path& path, const J& j) {
    write_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

// Runs fn(0..n-1) on up to `workers` threads. Each index owns its output
// slot, so results do not depend on scheduling. The first failure by index
// is rethrown after every worker has finished.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

fs::path output_path(const PipelineConfig& cfg, std::string_view name) {
    return fs::path(cfg.paths.output_dir) / name;
}

const std::vector<std::string_view>& rejection_reasons() {
    static const std::vector<std::string_view> reasons{
        "instruction_dup",
        to_string(llm::InstanceDiscard::block_count),
        to_string(llm::InstanceDiscard::input_equals_output),
        to_string(RejectReason::empty_field),
        to_string(RejectReason::too_long),
        to_string(RejectReason::instance_dup),
        "target_reached",
    };
    return reasons;
}

std::map<std::string, std::size_t> zero_rejections() {
    std::map<std::string, std::size_t> m;
    for (auto r : rejection_reasons()) m.emplace(r, 0);
    return m;
}

nlohmann::ordered_json counters_json(const RunCounters& c) {
    nlohmann::ordered_json rejected = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.rejected) rejected[k] = v;
    return {{"rounds", c.rounds},
            {"rounds_failed", c.rounds_failed},
            {"candidates", c.candidates},
            {"admitted", c.admitted},
            {"rejected", c.rejected_total()},
            {"rejected_by_reason", rejected},
            {"degenerate_scenarios", c.degenerate_scenarios},
            {"intents_classified", c.intents_classified},
            {"intent_fallbacks", c.intent_fallbacks},
            {"exchanges", c.exchanges}};
}

RunCounters counters_from_json(const nlohmann::json& j) {
    RunCounters c;
    c.rounds = j.at("rounds").get<std::size_t>();
    c.rounds_failed = j.at("rounds_failed").get<std::size_t>();
    c.candidates = j.at("candidates").get<std::size_t>();
    c.admitted = j.at("admitted").get<std::size_t>();
    c.rejected = zero_rejections();
    for (const auto& [k, v] : j.at("rejected_by_reason").items()) c.rejected[k] = v.get<std::size_t>();
    c.degenerate_scenarios = j.at("degenerate_scenarios").get<std::size_t>();
    c.intents_classified = j.at("intents_classified").get<std::size_t>();
    c.intent_fallbacks = j.at("intent_fallbacks").get<std::size_t>();
    c.exchanges = j.at("exchanges").get<std::size_t>();
    return c;
}

void add(RunCounters& into, const RunCounters& delta) {
    into.rounds += delta.rounds;
    into.rounds_failed += delta.rounds_failed;
    into.candidates += delta.candidates;
    into.admitted += delta.admitted;
    for (const auto& [k, v] : delta.rejected) into.rejected[k] += v;
    into.degenerate_scenarios += delta.degenerate_scenarios;
    into.intents_classified += delta.intents_classified;
    into.intent_fallbacks += delta.intent_fallbacks;
    into.exchanges += delta.exchanges;
}

// Everything that changes what a round produces. A state dir written under
// a different fingerprint is refused rather than silently mixed.
std::string run_fingerprint(const PipelineConfig& cfg, const llm::PromptLibrary& prompts,
                            const std::vector<std::string>& labels) {
    nlohmann::json j;
    const auto full = nlohmann::json(to_json(cfg));
    for (const char* key : {"seed", "held_out_count", "thresholds", "sampling", "minhash"})
        j[key] = full[key];
    j["llm"] = {{"backend", cfg.llm.backend},
                {"model", cfg.llm.model},
                {"temperature", cfg.llm.temperature},
                {"max_tokens", cfg.llm.max_tokens},
                {"max_retries", cfg.llm.max_retries}};
    for (auto k : llm::kAllPromptKinds) j["prompts"][std::string(llm::to_string(k))] = prompts.get(k).body;
    j["labels"] = labels;
    j["seed_pool"] = sha256_hex(read_file(cfg.paths.seed_pool));
    return sha256_hex(j.dump());
}

struct RunState {
    std::string fingerprint;
    std::size_t next_round = 0;
    std::size_t seeds_loaded = 0;
    std::size_t seeds_rejected = 0;
    std::vector<std::string> held_out;
    RunCounters counters;
};

// Pool and index files carry the round in their names and state.json names
// the current pair, so replacing state.json is the single commit point.
void save_state(const fs::path& dir, const RunState& st, const TaskPool& pool) {
    fs::create_directories(dir);
    const auto tag = fmt::format("{:06}", st.next_round);
    const std::string pool_file = "pool-" + tag + ".jsonl";
    const std::string index_file = "index-" + tag + ".bin";
    std::string previous_pool, previous_index;
    if (fs::exists(dir / "state.json")) {
        auto old = read_json(dir / "state.json");
        previous_pool = old.value("pool_file", "");
        previous_index = old.value("index_file", "");
    }
    write_corpus(dir / pool_file, pool.instances());
    pool.code_index().save(dir / index_file);
    nlohmann::ordered_json j;
    j["version"] = kStateVersion;
    j["fingerprint"] = st.fingerprint;
    j["next_round"] = st.next_round;
    j["pool_file"] = pool_file;
    j["index_file"] = index_file;
    j["pool_size"] = pool.size();
    j["seeds"] = {{"loaded", st.seeds_loaded}, {"rejected", st.seeds_rejected}};
    j["held_out"] = st.held_out;
    j["counters"] = counters_json(st.counters);
    write_json(dir / "state.json", j);
    for (const auto& f : {previous_pool, previous_index})
        if (!f.empty() && f != pool_file && f != index_file) fs::remove(dir / f);
}

std::optional<RunState> load_state(const fs::path& dir, TaskPool& pool) {
    if (!fs::exists(dir / "state.json")) return std::nullopt;
    auto j = read_json(dir / "state.json");
    try {
        if (j.at("version").get<int>() != kStateVersion)
            throw data_error("unsupported run state version in " + dir.string());
        RunState st;
        st.fingerprint = j.at("fingerprint").get<std::string>();
        st.next_round = j.at("next_round").get<std::size_t>();
        st.seeds_loaded = j.at("seeds").at("loaded").get<std::size_t>();
        st.seeds_rejected = j.at("seeds").at("rejected").get<std::size_t>();
        st.held_out = j.at("held_out").get<std::vector<std::string>>();
        st.counters = counters_from_json(j.at("counters"));
        auto instances = read_corpus(dir / j.at("pool_file").get<std::string>());
        if (instances.size() != j.at("pool_size").get<std::size_t>())
            throw data_error("run state pool size does not match " + dir.string());
        std::optional<CodeIndex> index;
        const fs::path index_path = dir / j.at("index_file").get<std::string>();
        try {
            index = CodeIndex::load(index_path);
        } catch (const Error& e) {
            spdlog::warn("ignoring code index snapshot {}: {}", index_path.string(), e.what());
        }
        std::unordered_set<std::string> held(st.held_out.begin(), st.held_out.end());
        if (!pool.restore_snapshot(std::move(instances), held, std::move(index)))
            spdlog::info("rebuilt the code index from the pool snapshot");
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed run state in " + dir.string() + ": " + e.what());
    }
}

void write_jsonl(const fs::path& path, const std::vector<nlohmann::json>& lines) {
    std::string body;
    for (const auto& l : lines) body += l.dump() + "\n";
    write_file(path, body);
}

void write_outputs(const PipelineConfig& cfg, const TaskPool& pool, const DatasetSplits& splits,
                   RunReport& report) {
    write_corpus(output_path(cfg, "corpus.jsonl"), pool.instances());
    write_json(output_path(cfg, "splits.json"), to_json(splits));
    export_splits(pool.instances(), splits, cfg.paths.output_dir);
    auto stats = compute_stats(pool.instances(), pool.config().tokenizer);
    write_json(output_path(cfg, "stats.json"), to_json(stats));
    write_file(output_path(cfg, "stats.txt"), format_stats(stats));
    report.train = splits.train.size();
    report.validation = splits.validation.size();
    report.test = splits.test.size();
    for (auto s : {Source::github_seed, Source::curated_seed, Source::generated})
        report.pool_by_source[std::string(to_string(s))] = pool.count(s);
}

llm::Orchestrator make_orchestrator(const PipelineConfig& cfg, llm::ChatClient& client) {
    return llm::Orchestrator(client, load_prompts(cfg), generation_settings(cfg),
                             load_intent_labels(cfg));
}

// Instructions without intent labels, classified in parallel and applied in
// pool order.
void classify_missing_intents(const PipelineConfig& cfg, const llm::Orchestrator& orch,
                              TaskPool& pool, RunCounters& counters, llm::ExchangeLog& log) {
    std::vector<std::string> ids;
    for (const auto& inst : pool.instances())
        if (!inst.intent) ids.push_back(inst.id);
    if (ids.empty()) return;
    std::vector<llm::IntentResult> results(ids.size());
    std::vector<llm::ExchangeLog> logs(ids.size());
    parallel_for(ids.size(), cfg.llm.max_concurrency, [&](std::size_t i) {
        results[i] = orch.classify_intent(pool.find(ids[i])->instruction, logs[i]);
    });
    for (std::size_t i = 0; i < ids.size(); ++i) {
        pool.set_intent(ids[i], results[i].label, results[i].exchange_ids);
        ++counters.intents_classified;
        counters.intent_fallbacks += results[i].fallback;
        counters.exchanges += logs[i].entries().size();
        log.append(logs[i]);
    }
}

std::vector<std::string> read_instruction_file(const fs::path& path) {
    std::vector<std::string> out;
    const std::string body = read_file(path);
    const bool jsonl = path.extension() == ".jsonl";
    std::size_t line_no = 0;
    for (auto line : text::split_lines(body)) {
        ++line_no;
        auto t = text::trim(line);
        if (t.empty()) continue;
        if (!jsonl) {
            out.emplace_back(t);
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(t).at("instruction").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw data_error(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

std::shared_ptr<llm::ChatClient> make_chat_client(const PipelineConfig& cfg) {
    std::shared_ptr<llm::ChatClient> inner;
    if (cfg.llm.backend == "mock") {
        auto mock = std::make_shared<llm::MockChatClient>(llm::synthetic_responder());
        if (!cfg.llm.mock_fixtures.empty()) mock->load_fixtures(cfg.llm.mock_fixtures);
        if (cfg.llm.mock_fail_after > 0) mock->fail_after(cfg.llm.mock_fail_after);
        inner = mock;
    } else if (cfg.llm.backend == "http") {
        llm::HttpBackendConfig http;
        http.endpoint = cfg.llm.endpoint;
        http.model = cfg.llm.model;
        if (const char* key = std::getenv(cfg.llm.api_key_env.c_str()))
            http.api_key = key;
        else
            spdlog::warn("{} is not set; sending requests without an API key",
                         cfg.llm.api_key_env);
        http.timeout = std::chrono::seconds(cfg.llm.timeout_s);
        inner = std::make_shared<llm::HttpChatClient>(std::move(http));
    } else {
        throw Error(ErrorCategory::config, "unknown llm.backend '" + cfg.llm.backend + "'");
    }
    return std::make_shared<llm::ThrottledChatClient>(
        inner, static_cast<std::ptrdiff_t>(cfg.llm.max_concurrency));
}

llm::PromptLibrary load_prompts(const PipelineConfig& cfg) {
    if (cfg.paths.prompts_dir.empty()) return {};
    if (!fs::is_directory(cfg.paths.prompts_dir))
        throw Error(ErrorCategory::config, "prompts_dir " + cfg.paths.prompts_dir + " is not a directory");
    return llm::PromptLibrary::from_directory(cfg.paths.prompts_dir);
}

std::vector<std::string> load_intent_labels(const PipelineConfig& cfg) {
    if (cfg.paths.intent_labels.empty()) return llm::default_intent_labels();
    std::vector<std::string> labels;
    for (auto line : text::split_lines(read_file(cfg.paths.intent_labels))) {
        auto t = text::trim(line);
        if (!t.empty() && t.front() != '#') labels.emplace_back(t);
    }
    if (labels.empty())
        throw Error(ErrorCategory::config, "intent label file " + cfg.paths.intent_labels + " is empty");
    return labels;
}

llm::GenerationSettings generation_settings(const PipelineConfig& cfg) {
    llm::GenerationSettings s;
    s.generation_temperature = cfg.llm.temperature;
    s.judge_temperature = cfg.llm.judge_temperature;
    s.max_tokens = static_cast<int>(cfg.llm.max_tokens);
    s.max_retries = static_cast<int>(cfg.llm.max_retries);
    s.transport_retries = static_cast<int>(cfg.llm.transport_retries);
    s.backoff_base = std::chrono::milliseconds(cfg.llm.backoff_ms);
    s.seeds_per_prompt = cfg.sampling.seeds_per_prompt;
    s.generated_per_prompt = cfg.sampling.generated_per_prompt;
    s.scenarios_per_instruction = cfg.sampling.scenarios_per_instruction;
    s.steer_intents = cfg.sampling.steer_intents;
    return s;
}

PoolConfig pool_config(const PipelineConfig& cfg) {
    PoolConfig p;
    p.rouge_threshold = cfg.thresholds.rouge_dup;
    p.code_index.num_perm = cfg.minhash.num_perm;
    p.code_index.threshold = cfg.thresholds.jaccard_dup;
    p.code_index.seed = cfg.minhash.seed;
    p.max_tokens = cfg.thresholds.max_tokens;
    return p;
}

FilterConfig filter_config(const PipelineConfig& cfg) {
    FilterConfig f;
    f.min_stars = cfg.thresholds.min_stars;
    f.max_edited_rows = cfg.thresholds.max_edited_rows;
    if (!cfg.mine.licenses.empty()) f.permitted_licenses = cfg.mine.licenses;
    return f;
}

SeedLoad load_seed_pool(const PipelineConfig& cfg, TaskPool& pool) {
    if (!fs::exists(cfg.paths.seed_pool))
        throw io_error("seed pool " + cfg.paths.seed_pool + " does not exist");
    SeedLoad load;
    for (auto& inst : read_corpus(cfg.paths.seed_pool)) {
        if (!is_seed(inst.source))
            throw data_error("seed pool entry " + inst.id + " has source " +
                             std::string(to_string(inst.source)));
        AdmissionCandidate c{inst.instruction, inst.scenario,      inst.input_code, inst.output_code,
                             inst.source,      inst.intent,        inst.exchange_ids};
        auto a = pool.admit(c);
        if (a.admitted()) {
            ++load.loaded;
        } else {
            ++load.rejected;
            ++load.rejected_by_reason[std::string(to_string(*a.reason))];
            spdlog::warn("seed {} not admitted: {}", inst.id, to_string(*a.reason));
        }
    }
    if (pool.size() == 0) throw data_error("seed pool " + cfg.paths.seed_pool + " has no usable seeds");
    Rng rng = Rng::derive(cfg.seed, "held-out");
    load.held_out = hold_out_seeds(pool, cfg.held_out_count, rng);
    return load;
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

std::size_t RunCounters::rejected_total() const {
    std::size_t n = 0;
    for (const auto& [_, v] : rejected) n += v;
    return n;
}

nlohmann::ordered_json to_json(const RunReport& r) {
    nlohmann::ordered_json sources = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.pool_by_source) sources[k] = v;
    nlohmann::ordered_json j;
    j["target_count"] = r.target_count;
    j["target_reached"] = r.target_reached;
    j["seeds"] = {{"loaded", r.seeds_loaded}, {"rejected", r.seeds_rejected}, {"held_out", r.held_out}};
    j["generation"] = counters_json(r.counters);
    j["pool_by_source"] = sources;
    j["splits"] = {{"train", r.train}, {"validation", r.validation}, {"test", r.test}};
    return j;
}

RunReport run_pipeline(const PipelineConfig& cfg, llm::ChatClient& client) {
    validate(cfg);
    const auto prompts = load_prompts(cfg);
    const auto labels = load_intent_labels(cfg);
    llm::Orchestrator orch(client, prompts, generation_settings(cfg), labels);
    const fs::path state_dir = cfg.state_dir();
    const fs::path exchanges_path = output_path(cfg, "exchanges.jsonl");
    fs::create_directories(cfg.paths.output_dir);

    TaskPool pool(pool_config(cfg));
    RunReport report;
    report.target_count = cfg.target_count;
    const std::string fingerprint = run_fingerprint(cfg, prompts, labels);

    RunState st;
    if (auto loaded = load_state(state_dir, pool)) {
        st = std::move(*loaded);
        if (st.fingerprint != fingerprint)
            throw Error(ErrorCategory::config,
                        "state dir " + state_dir.string() +
                            " belongs to a run with different settings; remove it or set "
                            "paths.state_dir elsewhere");
        report.resumed_at_round = st.next_round;
        spdlog::info("resuming at round {} with {} instances", st.next_round, pool.size());
    } else {
        fs::remove(exchanges_path);
        auto seeds = load_seed_pool(cfg, pool);
        st.fingerprint = fingerprint;
        st.seeds_loaded = seeds.loaded;
        st.seeds_rejected = seeds.rejected;
        st.held_out = seeds.held_out;
        st.counters.rejected = zero_rejections();
        save_state(state_dir, st, pool);
        spdlog::info("loaded {} seeds ({} rejected, {} held out)", seeds.loaded, seeds.rejected,
                     seeds.held_out.size());
    }

    const std::size_t target = cfg.target_count;
    while (pool.size() < target && st.next_round < cfg.max_rounds) {
        const std::size_t round = st.next_round;
        RunCounters delta;
        delta.rejected = zero_rejections();
        ++delta.rounds;

        llm::ExchangeLog round_log;
        Rng rng = Rng::derive(cfg.seed, fmt::format("round:{}", round));
        auto boot = orch.bootstrap_instructions(pool.instruction_view(), rng, round, round_log);
        if (boot.failure) {
            ++delta.rounds_failed;
            spdlog::warn("round {}: bootstrap failed: {}", round, *boot.failure);
        }

        // Duplicate instructions are dropped before spending calls on them,
        // against the pool and against earlier candidates of this round.
        InstructionIndex round_index(cfg.thresholds.rouge_dup);
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < boot.candidates.size(); ++i) {
            const auto& text = boot.candidates[i].text;
            ++delta.candidates;
            if (pool.check_instruction(text).duplicate || round_index.check(text).duplicate) {
                ++delta.rejected["instruction_dup"];
                continue;
            }
            round_index.add(fmt::format("c{}", i), text);
            todo.push_back(i);
        }

        struct TaskOut {
            llm::ScenarioResult scenarios;
            llm::InstanceResult instance;
            llm::ExchangeLog log;
        };
        std::vector<TaskOut> outs(todo.size());
        parallel_for(todo.size(), cfg.llm.max_concurrency, [&](std::size_t k) {
            const auto& text = boot.candidates[todo[k]].text;
            Rng task_rng = Rng::derive(cfg.seed, fmt::format("task:{}:{}", round, text));
            auto& out = outs[k];
            out.scenarios = orch.generate_scenarios(text, task_rng, out.log);
            out.instance = orch.generate_instance(text, out.scenarios.selected, out.log);
        });

        for (std::size_t k = 0; k < todo.size(); ++k) {
            const auto& cand = boot.candidates[todo[k]];
            auto& out = outs[k];
            round_log.append(out.log);
            delta.degenerate_scenarios += out.scenarios.degenerate;
            if (pool.size() >= target) {
                ++delta.rejected["target_reached"];
                continue;
            }
            if (!out.instance.ok()) {
                ++delta.rejected[std::string(to_string(out.instance.discard))];
                continue;
            }
            AdmissionCandidate c;
            c.instruction = cand.text;
            if (!out.scenarios.selected.empty()) c.scenario = out.scenarios.selected;
            c.input_code = out.instance.input_code;
            c.output_code = out.instance.output_code;
            c.source = Source::generated;
            if (!cand.exchange_id.empty()) c.exchange_ids.push_back(cand.exchange_id);
            for (const auto* ids : {&out.scenarios.exchange_ids, &out.instance.exchange_ids})
                c.exchange_ids.insert(c.exchange_ids.end(), ids->begin(), ids->end());
            auto a = pool.admit(c);
            if (a.admitted())
                ++delta.admitted;
            else
                ++delta.rejected[std::string(to_string(*a.reason))];
        }

        delta.exchanges = round_log.entries().size();
        round_log.write_jsonl(exchanges_path);
        add(st.counters, delta);
        st.next_round = round + 1;
        save_state(state_dir, st, pool);
        spdlog::info("round {}: {} candidates, {} admitted, pool {}/{}", round, delta.candidates,
                     delta.admitted, pool.size(), target);
    }
    if (pool.size() < target)
        spdlog::warn("round budget of {} exhausted with {} of {} instances", cfg.max_rounds,
                     pool.size(), target);

    {
        llm::ExchangeLog intent_log;
        RunCounters delta;
        classify_missing_intents(cfg, orch, pool, delta, intent_log);
        if (!intent_log.empty()) {
            intent_log.write_jsonl(exchanges_path);
            add(st.counters, delta);
            save_state(state_dir, st, pool);
        }
    }

    const std::size_t produced = st.counters.candidates;
    if (st.counters.admitted + st.counters.rejected_total() != produced)
        throw Error(ErrorCategory::internal,
                    fmt::format("run accounting broken: {} admitted + {} rejected != {} produced",
                                st.counters.admitted, st.counters.rejected_total(), produced));

    report.seeds_loaded = st.seeds_loaded;
    report.seeds_rejected = st.seeds_rejected;
    report.held_out = st.held_out.size();
    report.counters = st.counters;
    report.target_reached = pool.size() >= target;

    Rng split_rng = Rng::derive(cfg.seed, "split");
    auto splits = split_dataset(pool, split_rng);
    write_outputs(cfg, pool, splits, report);
    write_json(output_path(cfg, "run_report.json"), to_json(report));
    return report;
}

// ---------------------------------------------------------------------------
// Stage entry points
// ---------------------------------------------------------------------------

nlohmann::ordered_json to_json(const MineReport& r) {
    nlohmann::ordered_json dropped = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.dropped) dropped[k] = v;
    return {{"records", r.records}, {"kept", r.kept},         {"dropped", dropped},
            {"rewritten", r.rewritten}, {"parked", r.parked}, {"enqueued", r.enqueued}};
}

MineReport mine_repositories(const PipelineConfig& cfg, const std::vector<fs::path>& repos,
                             llm::ChatClient& client, review::ReviewStore* store) {
    const auto filters = filter_config(cfg);
    auto orch = make_orchestrator(cfg, client);
    MineReport report;
    std::vector<CommitRecord> kept;
    IngestOptions options;
    options.extension = cfg.mine.extension;
    for (const auto& repo : repos) {
        ingest_repo(repo, options, [&](MinedCommit&& mc) {
            ++report.records;
            auto verdict = apply_auto_filters(mc.record, mc.files_changed, filters);
            if (!verdict.kept) {
                ++report.dropped[std::string(to_string(verdict.reason))];
                return;
            }
            // A review item needs both sides; added or emptied files have one.
            if (text::trim(mc.record.content_before).empty() ||
                text::trim(mc.record.content_after).empty()) {
                ++report.dropped["empty_side"];
                return;
            }
            ++report.kept;
            kept.push_back(std::move(mc.record));
        });
    }

    std::vector<llm::RewriteResult> results(kept.size());
    std::vector<llm::ExchangeLog> logs(kept.size());
    parallel_for(kept.size(), cfg.llm.max_concurrency, [&](std::size_t i) {
        results[i] = orch.rewrite_commit_message(kept[i], logs[i]);
    });

    llm::ExchangeLog log;
    std::vector<nlohmann::json> mined, parked;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        log.append(logs[i]);
        const auto& rec = kept[i];
        if (results[i].parked()) {
            ++report.parked;
            parked.push_back(nlohmann::json(rec));
            continue;
        }
        ++report.rewritten;
        nlohmann::json payload = {{"instruction", *results[i].instruction},
                                  {"input", rec.content_before},
                                  {"output", rec.content_after},
                                  {"original_message", rec.message},
                                  {"repo_id", rec.repo_id},
                                  {"commit_sha", rec.commit_sha},
                                  {"file_path", rec.file_path},
                                  {"exchange_ids", results[i].exchange_ids}};
        if (store && store->enqueue(review::ItemKind::rewrite_confirm, payload).created)
            ++report.enqueued;
        mined.push_back(std::move(payload));
    }
    fs::create_directories(cfg.paths.output_dir);
    write_jsonl(output_path(cfg, "mined.jsonl"), mined);
    write_jsonl(output_path(cfg, "parked.jsonl"), parked);
    log.write_jsonl(output_path(cfg, "exchanges.jsonl"));
    write_json(output_path(cfg, "mine_report.json"), to_json(report));
    return report;
}

llm::BootstrapResult bootstrap_once(const PipelineConfig& cfg, llm::ChatClient& client,
                                    std::size_t round, const std::optional<fs::path>& extra) {
    auto orch = make_orchestrator(cfg, client);
    TaskPool pool(pool_config(cfg));
    load_seed_pool(cfg, pool);
    if (extra) {
        for (auto& inst : read_corpus(*extra)) {
            AdmissionCandidate c{inst.instruction, inst.scenario, inst.input_code,
                                 inst.output_code,  inst.source,   inst.intent,
                                 inst.exchange_ids};
            pool.admit(c);
        }
    }
    llm::ExchangeLog log;
    Rng rng = Rng::derive(cfg.seed, fmt::format("round:{}", round));
    auto result = orch.bootstrap_instructions(pool.instruction_view(), rng, round, log);
    if (result.failure) spdlog::warn("bootstrap failed: {}", *result.failure);

    std::vector<nlohmann::json> lines;
    for (const auto& c : result.candidates) {
        auto m = pool.check_instruction(c.text);
        nlohmann::json line = {{"instruction", c.text},
                               {"exemplar_ids", c.exemplar_ids},
                               {"exchange_id", c.exchange_id},
                               {"duplicate_of", nullptr}};
        if (m.duplicate && m.nearest_id) line["duplicate_of"] = *m.nearest_id;
        lines.push_back(std::move(line));
    }
    fs::create_directories(cfg.paths.output_dir);
    write_jsonl(output_path(cfg, "instructions.jsonl"), lines);
    log.write_jsonl(output_path(cfg, "exchanges.jsonl"));
    return result;
}

nlohmann::ordered_json to_json(const GenerateReport& r) {
    nlohmann::ordered_json rejected = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.rejected) rejected[k] = v;
    return {{"instructions", r.instructions},
            {"admitted", r.admitted},
            {"rejected", rejected},
            {"enqueued", r.enqueued}};
}

GenerateReport generate_from_instructions(const PipelineConfig& cfg, llm::ChatClient& client,
                                          const fs::path& instructions,
                                          review::ReviewStore* store) {
    auto orch = make_orchestrator(cfg, client);
    TaskPool pool(pool_config(cfg));
    load_seed_pool(cfg, pool);
    const auto texts = read_instruction_file(instructions);

    struct TaskOut {
        llm::ScenarioResult scenarios;
        llm::InstanceResult instance;
        llm::ExchangeLog log;
    };
    std::vector<TaskOut> outs(texts.size());
    parallel_for(texts.size(), cfg.llm.max_concurrency, [&](std::size_t i) {
        Rng rng = Rng::derive(cfg.seed, fmt::format("generate:{}", texts[i]));
        outs[i].scenarios = orch.generate_scenarios(texts[i], rng, outs[i].log);
        outs[i].instance = orch.generate_instance(texts[i], outs[i].scenarios.selected, outs[i].log);
    });

    GenerateReport report;
    report.instructions = texts.size();
    llm::ExchangeLog log;
    std::vector<TaskInstance> admitted;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto& out = outs[i];
        log.append(out.log);
        if (!out.instance.ok()) {
            ++report.rejected[std::string(to_string(out.instance.discard))];
            continue;
        }
        AdmissionCandidate c;
        c.instruction = texts[i];
        if (!out.scenarios.selected.empty()) c.scenario = out.scenarios.selected;
        c.input_code = out.instance.input_code;
        c.output_code = out.instance.output_code;
        c.source = Source::generated;
        for (const auto* ids : {&out.scenarios.exchange_ids, &out.instance.exchange_ids})
            c.exchange_ids.insert(c.exchange_ids.end(), ids->begin(), ids->end());
        auto a = pool.admit(c);
        if (!a.admitted()) {
            ++report.rejected[std::string(to_string(*a.reason))];
            continue;
        }
        ++report.admitted;
        const auto& inst = *a.instance;
        if (store) {
            nlohmann::json payload = {{"instruction", inst.instruction},
                                      {"input", inst.input_code},
                                      {"output", inst.output_code},
                                      {"origin", inst.id},
                                      {"exchange_ids", inst.exchange_ids}};
            if (inst.scenario) payload["scenario"] = *inst.scenario;
            if (store->enqueue(review::ItemKind::seed_candidate, payload).created) ++report.enqueued;
        }
        admitted.push_back(inst);
    }
    write_corpus(output_path(cfg, "generated.jsonl"), admitted);
    log.write_jsonl(output_path(cfg, "exchanges.jsonl"));
    write_json(output_path(cfg, "generate_report.json"), to_json(report));
    return report;
}

CorpusStats analyze_corpus(const PipelineConfig& cfg, const fs::path& corpus) {
    auto stats = compute_stats(read_corpus(corpus), pool_config(cfg).tokenizer);
    write_json(output_path(cfg, "stats.json"), to_json(stats));
    write_file(output_path(cfg, "stats.txt"), format_stats(stats));
    return stats;
}

DatasetSplits split_corpus(const PipelineConfig& cfg, const fs::path& corpus,
                           const std::optional<fs::path>& held_out) {
    TaskPool pool(pool_config(cfg));
    std::unordered_set<std::string> held;
    if (held_out) {
        auto j = read_json(*held_out);
        if (!j.is_array()) throw data_error(held_out->string() + ": expected a JSON array of ids");
        for (const auto& e : j) held.insert(e.get<std::string>());
    }
    pool.restore_snapshot(read_corpus(corpus), held);
    if (!held_out) {
        Rng rng = Rng::derive(cfg.seed, "held-out");
        hold_out_seeds(pool, cfg.held_out_count, rng);
    }
    Rng rng = Rng::derive(cfg.seed, "split");
    auto splits = split_dataset(pool, rng);
    write_json(output_path(cfg, "splits.json"), to_json(splits));
    return splits;
}

void export_splits(const std::vector<TaskInstance>& instances, const DatasetSplits& splits,
                   const fs::path& dir) {
    std::unordered_map<std::string, const TaskInstance*> by_id;
    for (const auto& inst : instances) by_id.emplace(inst.id, &inst);
    auto write_split = [&](const std::vector<std::string>& ids, const char* name) {
        std::vector<TaskInstance> part;
        part.reserve(ids.size());
        for (const auto& id : ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw data_error(fmt::format("split {} names unknown id {}", name, id));
            part.push_back(*it->second);
        }
        write_corpus(dir / (std::string(name) + ".jsonl"), part);
    };
    write_split(splits.train, "train");
    write_split(splits.validation, "validation");
    write_split(splits.test, "test");
}

EvalReport judge_samples(const PipelineConfig& cfg, llm::ChatClient& client,
                         const JudgeOptions& options, review::ReviewStore* store) {
    auto orch = make_orchestrator(cfg, client);
    const auto samples = read_eval_samples(options.samples);
    std::unordered_map<std::string, DiffStats> reference;
    for (const auto& inst : read_corpus(options.reference)) reference.emplace(inst.id, inst.diff);

    Rng sheet_rng = Rng::derive(cfg.seed, "eval-sheet");
    auto sheet = EvalSheet::create(samples, sheet_rng);

    // Run 0 lives on the sheet; later runs are copies judged independently.
    std::vector<EvalRecord> all;
    for (std::size_t run = 0; run < cfg.eval.runs; ++run)
        for (const auto& rec : sheet.records()) {
            all.push_back(rec);
            all.back().run = static_cast<int>(run);
        }
    std::vector<llm::ExchangeLog> logs(all.size());
    parallel_for(all.size(), cfg.llm.max_concurrency, [&](std::size_t i) {
        if (text::trim(all[i].model_output).empty()) {
            all[i].unjudged = true;
            return;
        }
        judge_with_llm(all[i], orch, logs[i]);
    });
    llm::ExchangeLog log;
    for (std::size_t i = 0; i < all.size(); ++i) {
        log.append(logs[i]);
        if (all[i].run == 0) {
            auto* rec = sheet.find(all[i].anon_id);
            rec->judge_verdict = all[i].judge_verdict;
            rec->judge_exchange_id = all[i].judge_exchange_id;
            rec->unjudged = all[i].unjudged;
        }
    }

    if (store && options.enqueue_review)
        spdlog::info("queued {} eval_score item(s) for review", review::enqueue_eval_sheet(*store, sheet));
    if (store && options.collect_review) {
        auto outcome = review::collect_eval_scores(*store, sheet);
        spdlog::info("collected {} human score(s)", outcome.accepted + outcome.replaced);
        for (auto& rec : all)
            if (auto* s = sheet.find(rec.anon_id)) rec.human_scores = s->human_scores;
    }

    auto report = build_eval_report(all, reference);
    report.per_model_accuracy = sheet.model_accuracy();
    bool any_scored = false;
    for (const auto& rec : sheet.records())
        any_scored |= !rec.human_scores.empty() && rec.judge_verdict.has_value();
    if (any_scored) {
        report.human_breakdown = sheet.breakdown();
        report.agreement = human_judge_agreement(sheet.records());
    }

    fs::create_directories(cfg.paths.output_dir);
    sheet.save(output_path(cfg, "eval_sheet.json"));
    write_json(output_path(cfg, "eval_report.json"), to_json(report));
    log.write_jsonl(output_path(cfg, "exchanges.jsonl"));
    return report;
}

}  // namespace editforge
