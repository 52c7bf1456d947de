// editforge command-line entry point.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "editforge/config.hpp"
#include "editforge/error.hpp"
#include "editforge/pipeline.hpp"
#include "editforge/review.hpp"
#include "editforge/review_server.hpp"

namespace fs = std::filesystem;
using namespace editforge;

namespace {

int fail(ErrorCategory category, const std::string& message) {
    nlohmann::json j = {{"error", to_string(category)}, {"message", message}};
    std::cerr << j.dump() << std::endl;
    return exit_code(category);
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << std::endl; }

fs::path default_in_output(const PipelineConfig& cfg, const std::string& given, const char* name) {
    return given.empty() ? fs::path(cfg.paths.output_dir) / name : fs::path(given);
}

std::unique_ptr<review::ReviewStore> open_store(const PipelineConfig& cfg) {
    return std::make_unique<review::ReviewStore>(cfg.paths.review_dir);
}

review::ServerConfig server_config(const PipelineConfig& cfg) {
    review::ServerConfig sc;
    sc.host = cfg.review.host;
    sc.port = static_cast<int>(cfg.review.port);
    if (!cfg.review.static_dir.empty()) sc.static_dir = cfg.review.static_dir;
    sc.seed_pool_path = cfg.paths.seed_pool;
    sc.pool = pool_config(cfg);
    return sc;
}

// Blocks SIGINT/SIGTERM everywhere and stops the server from a waiter
// thread, which keeps the handler logic out of signal context.
int serve_until_signal(review::ReviewServer& server) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    const int port = server.bind();
    spdlog::info("review service listening on port {}", port);
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        spdlog::info("signal {} received, shutting down", sig);
        server.stop();
    });
    server.listen();
    // listen() also returns if the server stops on its own; wake the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("editforge");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

    CLI::App app{"editforge: build instruction-tuning corpora of code edits"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    bool verbose = false, quiet = false, print_config = false;
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Warnings and errors only");
    app.add_flag("--print-config", print_config, "Print the effective config and exit");

    // One flag per config field, named by its dotted key.
    std::map<std::string, std::string> override_values;
    std::vector<std::pair<std::string, CLI::Option*>> override_opts;
    auto* group = app.add_option_group("Config overrides");
    for (const auto& [key, def] : config_fields()) {
        auto* opt = group->add_option("--" + key, override_values[key],
                                      "default: " + def.dump());
        override_opts.emplace_back(key, opt);
    }

    auto* run = app.add_subcommand("run", "Full pipeline from seeds to exported splits");

    auto* mine = app.add_subcommand("mine", "Mine commit edits from local git repositories");
    std::vector<std::string> repos;
    bool mine_enqueue = false;
    mine->add_option("repos", repos, "Repository directories")->required();
    mine->add_flag("--enqueue", mine_enqueue, "Queue rewritten edits for review");

    auto* boot = app.add_subcommand("bootstrap", "One instruction bootstrapping round");
    std::size_t boot_round = 0;
    std::string boot_extra;
    boot->add_option("--round", boot_round, "Round index (selects the steering intent and RNG stream)");
    boot->add_option("--extra", boot_extra, "Corpus of generated instances to sample from as well");

    auto* gen = app.add_subcommand("generate", "Scenario and instance generation for instructions");
    std::string gen_input;
    bool gen_enqueue = false;
    gen->add_option("instructions", gen_input, "Text file (one per line) or instructions.jsonl")
        ->required();
    gen->add_flag("--enqueue", gen_enqueue, "Queue admitted instances as seed candidates");

    auto* analyze = app.add_subcommand("analyze", "Corpus statistics");
    std::string analyze_corpus_path;
    analyze->add_option("--corpus", analyze_corpus_path, "Corpus file (default <output_dir>/corpus.jsonl)");

    auto* split = app.add_subcommand("split", "Train/validation/test split of a corpus");
    std::string split_corpus_path, split_held_out;
    split->add_option("--corpus", split_corpus_path, "Corpus file (default <output_dir>/corpus.jsonl)");
    split->add_option("--held-out", split_held_out, "JSON array of held-out seed ids");

    auto* exp = app.add_subcommand("export", "Write train/validation/test JSON-lines files");
    std::string export_corpus_path, export_splits_path;
    exp->add_option("--corpus", export_corpus_path, "Corpus file (default <output_dir>/corpus.jsonl)");
    exp->add_option("--splits", export_splits_path, "Splits file (default <output_dir>/splits.json)");

    auto* judge = app.add_subcommand("judge", "LLM-as-judge evaluation of model edits");
    JudgeOptions judge_opts;
    judge->add_option("--samples", judge_opts.samples, "Model outputs (JSON lines)")->required();
    judge->add_option("--reference", judge_opts.reference, "Reference corpus keyed by sample id")
        ->required();
    judge->add_flag("--enqueue-review", judge_opts.enqueue_review, "Queue the anonymised sheet for raters");
    judge->add_flag("--collect-review", judge_opts.collect_review, "Include scores collected so far");

    auto* serve = app.add_subcommand("serve-review", "Serve the review HTTP API");
    bool promote_only = false;
    serve->add_flag("--promote-only", promote_only, "Promote accepted items into the seed pool and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ErrorCategory::config, e.what());
    }

    spdlog::set_level(verbose ? spdlog::level::debug
                              : quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& [key, opt] : override_opts)
            if (opt->count() > 0) overrides.emplace_back(key, override_values[key]);
        const PipelineConfig cfg = load_config(config_path, overrides);
        if (print_config) {
            print_json(to_json(cfg));
            return 0;
        }

        if (*serve) {
            auto store = open_store(cfg);
            review::ReviewServer server(*store, server_config(cfg));
            if (promote_only) {
                auto s = server.promote();
                nlohmann::ordered_json rejected = nlohmann::ordered_json::array();
                for (const auto& [id, reason] : s.rejected)
                    rejected.push_back({{"item_id", id}, {"reason", reason}});
                print_json({{"promoted", s.promoted}, {"rejected", rejected}});
                return 0;
            }
            return serve_until_signal(server);
        }

        if (*analyze) {
            auto stats = analyze_corpus(cfg, default_in_output(cfg, analyze_corpus_path, "corpus.jsonl"));
            std::cout << format_stats(stats);
            return 0;
        }
        if (*split) {
            std::optional<fs::path> held;
            if (!split_held_out.empty()) held = split_held_out;
            auto s = split_corpus(cfg, default_in_output(cfg, split_corpus_path, "corpus.jsonl"), held);
            print_json({{"train", s.train.size()}, {"validation", s.validation.size()}, {"test", s.test.size()}});
            return 0;
        }
        if (*exp) {
            const auto corpus = read_corpus(default_in_output(cfg, export_corpus_path, "corpus.jsonl"));
            std::ifstream in(default_in_output(cfg, export_splits_path, "splits.json"));
            if (!in) throw Error(ErrorCategory::io, "cannot read splits file");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCategory::data, std::string("malformed splits file: ") + e.what());
            }
            export_splits(corpus, splits_from_json(j), cfg.paths.output_dir);
            return 0;
        }

        auto client = make_chat_client(cfg);
        if (*run) {
            print_json(to_json(run_pipeline(cfg, *client)));
        } else if (*mine) {
            std::vector<fs::path> paths(repos.begin(), repos.end());
            auto store = mine_enqueue ? open_store(cfg) : nullptr;
            print_json(to_json(mine_repositories(cfg, paths, *client, store.get())));
        } else if (*boot) {
            std::optional<fs::path> extra;
            if (!boot_extra.empty()) extra = boot_extra;
            auto r = bootstrap_once(cfg, *client, boot_round, extra);
            print_json({{"candidates", r.candidates.size()},
                        {"seed_exemplars", r.seed_exemplars},
                        {"generated_exemplars", r.generated_exemplars},
                        {"failed", r.failure.has_value()}});
        } else if (*gen) {
            auto store = gen_enqueue ? open_store(cfg) : nullptr;
            print_json(to_json(generate_from_instructions(cfg, *client, gen_input, store.get())));
        } else if (*judge) {
            std::unique_ptr<review::ReviewStore> store;
            if (judge_opts.enqueue_review || judge_opts.collect_review) store = open_store(cfg);
            auto report = judge_samples(cfg, *client, judge_opts, store.get());
            std::cout << format_report(report);
        }
        return 0;
    } catch (const Error& e) {
        return fail(e.category(), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(ErrorCategory::io, e.what());
    } catch (const std::exception& e) {
        return fail(ErrorCategory::internal, e.what());
    }
}
