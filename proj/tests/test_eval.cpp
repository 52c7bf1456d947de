#include <gtest/gtest.h>

#include "editforge/error.hpp"
#include "editforge/eval.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;

namespace {

EvalRecord judged(std::string id, std::optional<Verdict> v) {
    EvalRecord r;
    r.sample_id = std::move(id);
    r.judge_verdict = v;
    r.unjudged = !v.has_value();
    return r;
}

DiffStats diff_in_bin(int bin) {
    DiffStats d;
    d.bin = bin;
    return d;
}

std::vector<EvalSample> samples(std::size_t per_model, std::vector<std::string> models) {
    std::vector<EvalSample> out;
    for (const auto& m : models)
        for (std::size_t i = 0; i < per_model; ++i)
            out.push_back({m + "-" + std::to_string(i), "Add a test", "x = 1", "x = 2", m});
    return out;
}

}  // namespace

TEST(Verdict, Parse) {
    EXPECT_EQ(parse_verdict("Yes, the edit is correct."), Verdict::yes);
    EXPECT_EQ(parse_verdict("No."), Verdict::no);
    EXPECT_EQ(parse_verdict("Maybe"), std::nullopt);
    EXPECT_EQ(parse_verdict("Eyes only"), std::nullopt);
    EXPECT_EQ(parse_verdict("I think NO, because yes is wrong"), Verdict::no);
}

TEST(Judge, UnjudgedAfterRetries) {
    llm::MockChatClient client([](std::string_view) { return std::string("Maybe"); });
    llm::GenerationSettings gs;
    gs.max_retries = 2;
    gs.backoff_base = std::chrono::milliseconds(0);
    llm::Orchestrator o(client, llm::PromptLibrary{}, gs);
    llm::ExchangeLog log;
    EvalRecord r;
    r.instruction = "Add a test";
    r.input_code = "x";
    r.model_output = "y";
    judge_with_llm(r, o, log);
    EXPECT_TRUE(r.unjudged);
    EXPECT_FALSE(r.judge_verdict.has_value());
    EXPECT_EQ(client.calls(), 3u);

    llm::MockChatClient yes([](std::string_view) { return std::string("Yes, the edit is correct."); });
    llm::Orchestrator oy(yes, llm::PromptLibrary{}, gs);
    judge_with_llm(r, oy, log);
    EXPECT_EQ(r.judge_verdict, Verdict::yes);
    EXPECT_FALSE(r.unjudged);

    r.model_output = "";
    EXPECT_THROW(judge_with_llm(r, oy, log), ContractViolation);
}

TEST(Report, ThreeOfFour) {
    std::vector<EvalRecord> recs{judged("a", Verdict::yes), judged("b", Verdict::yes),
                                 judged("c", Verdict::yes), judged("d", Verdict::no),
                                 judged("e", std::nullopt)};
    std::unordered_map<std::string, DiffStats> diffs;
    for (auto id : {"a", "b", "c", "d", "e"}) diffs[id] = diff_in_bin(5);
    auto r = build_eval_report(recs, diffs);
    EXPECT_EQ(r.judged, 4u);
    EXPECT_EQ(r.unjudged, 1u);
    EXPECT_DOUBLE_EQ(r.overall_accuracy, 0.75);
}

TEST(Report, AllInBinFive) {
    std::vector<EvalRecord> recs{judged("a", Verdict::yes), judged("b", Verdict::yes)};
    std::unordered_map<std::string, DiffStats> diffs{{"a", diff_in_bin(5)}, {"b", diff_in_bin(5)}};
    auto r = build_eval_report(recs, diffs);
    EXPECT_EQ(r.per_bin_accuracy[4], 1.0);
    for (int b = 0; b < 4; ++b) EXPECT_FALSE(r.per_bin_accuracy[b].has_value());
}

TEST(Report, Errors) {
    EXPECT_THROW(build_eval_report({judged("a", std::nullopt)}, {}), ContractViolation);
    try {
        build_eval_report({judged("a", Verdict::yes)}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::data);
    }
}

TEST(Majority, TiesGoWorse) {
    using H = HumanScore;
    EXPECT_EQ(majority_score({H::correct, H::correct, H::wrong}), H::correct);
    EXPECT_EQ(majority_score({H::correct, H::partial}), H::partial);
    EXPECT_EQ(majority_score({H::correct, H::partial, H::wrong}), H::wrong);
}

TEST(Agreement, MappingRule) {
    using H = HumanScore;
    auto rec = [](Verdict v, std::vector<H> scores) {
        EvalRecord r;
        r.judge_verdict = v;
        for (std::size_t i = 0; i < scores.size(); ++i) r.human_scores["r" + std::to_string(i)] = scores[i];
        return r;
    };
    // yes + partial majority: hit. no + correct majority: miss.
    EXPECT_EQ(human_judge_agreement({rec(Verdict::yes, {H::partial, H::partial, H::correct})}), 1.0);
    EXPECT_EQ(human_judge_agreement({rec(Verdict::no, {H::correct, H::correct, H::wrong})}), 0.0);
    std::vector<EvalRecord> four{rec(Verdict::yes, {H::partial, H::partial, H::wrong}),
                                 rec(Verdict::no, {H::wrong, H::wrong, H::correct}),
                                 rec(Verdict::no, {H::correct, H::correct, H::correct}),
                                 rec(Verdict::yes, {H::wrong, H::wrong, H::partial})};
    EXPECT_EQ(human_judge_agreement(four), 0.5);
    EXPECT_THROW(human_judge_agreement({judged("x", Verdict::yes)}), ContractViolation);
}

TEST(Sheet, AnonymousAndDeterministic) {
    auto s = samples(3, {"model-a", "model-b"});
    Rng r1(7), r2(7);
    auto a = EvalSheet::create(s, r1);
    auto b = EvalSheet::create(s, r2);
    ASSERT_EQ(a.records().size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(a.records()[i].anon_id, b.records()[i].anon_id);
        auto view = a.rater_view(a.records()[i]).dump();
        EXPECT_EQ(view.find("model"), std::string::npos) << view;
        EXPECT_EQ(view.find("sample_id"), std::string::npos);
    }
}

TEST(Sheet, ScoresUpsertAndBreakdown) {
    auto s = samples(2, {"M"});
    Rng rng(1);
    auto sheet = EvalSheet::create(s, rng);
    std::vector<ScoreEntry> entries;
    for (const auto& rec : sheet.records())
        for (auto rater : {"r1", "r2", "r3"}) entries.push_back({rater, rec.anon_id, HumanScore::correct});
    auto out = sheet.record_scores(entries);
    EXPECT_EQ(out.accepted, 6u);
    auto bd = sheet.breakdown();
    EXPECT_DOUBLE_EQ(bd["M"].correct, 100.0);
    EXPECT_DOUBLE_EQ(bd["M"].partial, 0.0);
    EXPECT_DOUBLE_EQ(bd["M"].wrong, 0.0);

    const auto& first = sheet.records()[0].anon_id;
    auto again = sheet.record_scores({{"r1", first, HumanScore::wrong}});
    EXPECT_EQ(again.replaced, 1u);
    EXPECT_EQ(sheet.find(first)->human_scores.size(), 3u);
    EXPECT_EQ(sheet.find(first)->human_scores.at("r1"), HumanScore::wrong);

    auto unknown = sheet.record_scores({{"r1", "nope", HumanScore::wrong}});
    ASSERT_EQ(unknown.rejected.size(), 1u);
}

TEST(Sheet, SaveLoad) {
    fx::TempDir dir;
    auto s = samples(2, {"A", "B"});
    Rng rng(3);
    auto sheet = EvalSheet::create(s, rng);
    sheet.records()[0].judge_verdict = Verdict::yes;
    sheet.save(dir / "sheet.json");
    auto back = EvalSheet::load(dir / "sheet.json");
    ASSERT_EQ(back.records().size(), 4u);
    EXPECT_EQ(back.records()[0].judge_verdict, Verdict::yes);
    EXPECT_EQ(back.model_of(back.records()[1].anon_id), sheet.model_of(sheet.records()[1].anon_id));
}
