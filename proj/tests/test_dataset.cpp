#include <gtest/gtest.h>

#include <set>

#include "editforge/dataset.hpp"
#include "editforge/error.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;

namespace {

AdmissionCandidate candidate(std::string instruction, std::string input, std::string output,
                             Source source = Source::generated) {
    AdmissionCandidate c;
    c.instruction = std::move(instruction);
    c.input_code = std::move(input);
    c.output_code = std::move(output);
    c.source = source;
    return c;
}

const std::string kLexerInput =
    "def lex(text):\n    tokens = []\n    for ch in text:\n        tokens.append(ch)\n    return tokens";
const std::string kLexerOutput =
    "def lex(text):\n    tokens = []\n    for ch in text:\n        if ch.isspace():\n            continue\n"
    "        tokens.append(ch)\n    return tokens";

}  // namespace

TEST(Admission, NovelPairAdmittedWithDiff) {
    TaskPool pool;
    auto a = pool.admit(candidate("add error handling to the lexer", kLexerInput, kLexerOutput));
    ASSERT_TRUE(a.admitted());
    EXPECT_EQ(a.instance->diff, line_diff(kLexerInput, kLexerOutput));
    EXPECT_EQ(a.instance->id, instance_id("add error handling to the lexer", kLexerInput, kLexerOutput));
    EXPECT_EQ(pool.size(), 1u);
}

TEST(Admission, DuplicateInputRejected) {
    TaskPool pool;
    ASSERT_TRUE(pool.admit(candidate("add error handling to the lexer", kLexerInput, kLexerOutput)).admitted());
    auto a = pool.admit(candidate("memoize the tokenizer", kLexerInput, kLexerOutput + "\n# cached"));
    EXPECT_FALSE(a.admitted());
    EXPECT_EQ(a.reason, RejectReason::instance_dup);
    EXPECT_EQ(pool.size(), 1u);
}

TEST(Admission, DuplicateInstructionRejected) {
    TaskPool pool;
    auto first = pool.admit(candidate("add error handling to the lexer", kLexerInput, kLexerOutput));
    auto a = pool.admit(candidate("add error handling to the parser", "x = 1", "x = 2"));
    EXPECT_EQ(a.reason, RejectReason::instruction_dup);
    EXPECT_EQ(a.matched_id, first.instance->id);
    EXPECT_EQ(a.score, 5.0 / 6.0);
}

TEST(Admission, SeedsSkipInstructionDedup) {
    TaskPool pool;
    ASSERT_TRUE(pool.admit(candidate("add error handling to the lexer", kLexerInput, kLexerOutput,
                                     Source::github_seed)).admitted());
    EXPECT_TRUE(pool.admit(candidate("add error handling to the parser", "x = 1", "x = 2",
                                     Source::curated_seed)).admitted());
}

TEST(Admission, ContractChecks) {
    TaskPool pool;
    EXPECT_EQ(pool.admit(candidate("", "a", "b")).reason, RejectReason::empty_field);
    EXPECT_EQ(pool.admit(candidate("do it", "", "b")).reason, RejectReason::empty_field);
    EXPECT_EQ(pool.admit(candidate("do it", "same", "same")).reason, RejectReason::input_equals_output);
    // Cleaning happens first: fences do not make a difference.
    EXPECT_EQ(pool.admit(candidate("do it", "```python\nsame\n```", "same\n")).reason,
              RejectReason::input_equals_output);

    PoolConfig small;
    small.max_tokens = 5;
    TaskPool tight(small);
    EXPECT_EQ(tight.admit(candidate("do it", "a b c d e f", "a")).reason, RejectReason::too_long);
    EXPECT_EQ(tight.size(), 0u);
}

TEST(Admission, EvaluateDoesNotInsert) {
    TaskPool pool;
    auto e = pool.evaluate(candidate("add a cache", "x = 1", "x = 2"));
    EXPECT_TRUE(e.admitted());
    EXPECT_EQ(pool.size(), 0u);
}

TEST(CleanCode, StripsFencesAndBlankEdges) {
    EXPECT_EQ(clean_code("\n```python\n\nx = 1\n  y\n```\n\n"), "x = 1\n  y");
}

TEST(Corpus, RoundTrip) {
    fx::TempDir dir;
    std::vector<TaskInstance> items;
    for (int i = 0; i < 5; ++i) items.push_back(fx::make_instance(i));
    items[1].intent = "Add Tests";
    items[2].scenario = "a web service";
    items[3].exchange_ids = {"e1", "e2"};
    write_corpus(dir / "c.jsonl", items);
    auto back = read_corpus(dir / "c.jsonl");
    EXPECT_EQ(back, items);
    write_corpus(dir / "c2.jsonl", back);
    EXPECT_EQ(fx::read_text(dir / "c.jsonl"), fx::read_text(dir / "c2.jsonl"));
}

TEST(Corpus, RejectsBadLines) {
    auto j = to_corpus_json(fx::make_instance(1));
    auto bad = j;
    bad["n_diff"] = 99;
    EXPECT_THROW(from_corpus_json(bad), Error);
    bad = j;
    bad["model"] = "x";
    EXPECT_THROW(from_corpus_json(bad), Error);
    bad = j;
    bad.erase("instruction");
    EXPECT_THROW(from_corpus_json(bad), Error);
    bad = j;
    bad["source"] = "web";
    EXPECT_THROW(from_corpus_json(bad), Error);

    nlohmann::json minimal = {{"instruction", "i"}, {"input", "a"}, {"output", "b"}, {"source", "generated"}};
    auto inst = from_corpus_json(minimal);
    EXPECT_EQ(inst.diff.n_diff, 2u);
    EXPECT_FALSE(inst.id.empty());
}

TEST(Pool, RestoreRejectsRepeatedIds) {
    TaskPool pool;
    pool.restore(fx::make_instance(1));
    EXPECT_THROW(pool.restore(fx::make_instance(1)), Error);
}

TEST(Pool, HeldOutOnlyForGithubSeeds) {
    TaskPool pool;
    pool.restore(fx::make_instance(1, Source::curated_seed));
    EXPECT_THROW(pool.set_held_out(pool.instances()[0].id, true), Error);
}

TEST(Pool, InstructionViewExcludesHeldOut) {
    TaskPool pool;
    for (int i = 0; i < 4; ++i) pool.restore(fx::make_instance(i), i == 0);
    pool.restore(fx::make_instance(9, Source::generated));
    auto v = pool.instruction_view();
    EXPECT_EQ(v.seeds.size(), 3u);
    EXPECT_EQ(v.generated.size(), 1u);
}

TEST(Pool, SnapshotAdoptsMatchingIndex) {
    TaskPool a;
    for (int i = 0; i < 6; ++i) a.restore(fx::make_instance(i));
    TaskPool b;
    EXPECT_TRUE(b.restore_snapshot(a.instances(), {}, a.code_index()));
    TaskPool c;
    CodeIndex wrong;
    EXPECT_FALSE(c.restore_snapshot(a.instances(), {}, wrong));
    EXPECT_EQ(c.code_index().size(), 6u);
}

TEST(Splits, ThousandPlusTwentyHeldOut) {
    TaskPool pool;
    for (int i = 0; i < 1020; ++i) pool.restore(fx::make_instance(i, i < 40 ? Source::github_seed : Source::generated));
    Rng pick(5);
    auto held = hold_out_seeds(pool, 20, pick);
    ASSERT_EQ(held.size(), 20u);
    Rng rng(9);
    auto s = split_dataset(pool, rng);
    EXPECT_EQ(s.train.size(), 950u);
    EXPECT_EQ(s.validation.size(), 50u);
    EXPECT_EQ(s.test.size(), 20u);
    std::set<std::string> all;
    for (auto* part : {&s.train, &s.validation, &s.test}) all.insert(part->begin(), part->end());
    EXPECT_EQ(all.size(), 1020u);
    EXPECT_EQ(std::set<std::string>(s.test.begin(), s.test.end()),
              std::set<std::string>(held.begin(), held.end()));

    Rng again(9);
    auto s2 = split_dataset(pool, again);
    EXPECT_EQ(s.train, s2.train);
}

TEST(Splits, NoHeldOutGivesEmptyTest) {
    TaskPool pool;
    for (int i = 0; i < 10; ++i) pool.restore(fx::make_instance(i));
    Rng rng(1);
    auto s = split_dataset(pool, rng);
    EXPECT_TRUE(s.test.empty());
    EXPECT_EQ(s.train.size() + s.validation.size(), 10u);
}

TEST(Splits, JsonRoundTrip) {
    DatasetSplits s{{"a", "b"}, {"c"}, {"d"}};
    auto back = splits_from_json(to_json(s));
    EXPECT_EQ(back.train, s.train);
    EXPECT_EQ(back.test, s.test);
}
