#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "editforge/dedup.hpp"
#include "editforge/diff_metrics.hpp"
#include "editforge/minhash.hpp"
#include "editforge/rouge.hpp"

namespace {

std::string code_block(std::mt19937_64& rng, std::size_t lines) {
    std::string out;
    for (std::size_t i = 0; i < lines; ++i)
        out += "    item_" + std::to_string(rng() % 500) + " = compute(" + std::to_string(rng() % 97) + ")\n";
    return out;
}

std::string sentence(std::mt19937_64& rng, std::size_t words) {
    static const char* vocab[] = {"add",   "remove", "the",    "a",       "cache",  "parser",
                                  "loop",  "to",     "in",     "handler", "logging", "retry",
                                  "error", "input",  "config", "helper",  "test",   "function"};
    std::string out;
    for (std::size_t i = 0; i < words; ++i) out += std::string(vocab[rng() % 18]) + " ";
    return out;
}

void BM_LineDiff(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto a = code_block(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = code_block(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(editforge::line_diff(a, b));
}
BENCHMARK(BM_LineDiff)->Arg(20)->Arg(200)->Arg(2000);

void BM_RougeL(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto a = sentence(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = sentence(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(editforge::rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(8)->Arg(32)->Arg(128);

void BM_InstructionIndexCheck(benchmark::State& state) {
    std::mt19937_64 rng(3);
    editforge::InstructionIndex index;
    for (int i = 0; i < state.range(0); ++i) index.add("i" + std::to_string(i), sentence(rng, 4 + rng() % 10));
    const auto probe = sentence(rng, 9);
    for (auto _ : state) benchmark::DoNotOptimize(index.check(probe));
}
BENCHMARK(BM_InstructionIndexCheck)->Arg(1000)->Arg(10000);

void BM_MinHashSign(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const auto shingles = editforge::shingle_set(code_block(rng, static_cast<std::size_t>(state.range(0))));
    const editforge::MinHasher hasher(128, 1);
    for (auto _ : state) benchmark::DoNotOptimize(hasher.sign(shingles));
}
BENCHMARK(BM_MinHashSign)->Arg(10)->Arg(100);

void BM_CodeIndexCheck(benchmark::State& state) {
    std::mt19937_64 rng(5);
    editforge::CodeIndex index;
    for (int i = 0; i < state.range(0); ++i) index.insert("c" + std::to_string(i), code_block(rng, 20));
    const auto probe = code_block(rng, 20);
    for (auto _ : state) benchmark::DoNotOptimize(index.check(probe));
}
BENCHMARK(BM_CodeIndexCheck)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
