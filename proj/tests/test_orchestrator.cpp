#include <gtest/gtest.h>

#include <set>

#include "editforge/llm/orchestrator.hpp"
#include "editforge/llm/synthetic.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;
using namespace editforge::llm;

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Answers each stage from a fixed table; stages not in the table get "".
struct StageMock {
    std::map<PromptKind, std::string> answers;
    MockChatClient client;

    StageMock() {
        client.set_fallback([this](std::string_view prompt) -> std::string {
            for (const auto& [kind, answer] : answers)
                if (starts_with(prompt, task_statement(kind).substr(0, 40))) return answer;
            return "";
        });
    }
};

GenerationSettings fast_settings() {
    GenerationSettings s;
    s.backoff_base = std::chrono::milliseconds(0);
    s.transport_retries = 0;
    s.max_retries = 2;
    return s;
}

PoolView seed_view(std::size_t seeds, std::size_t generated = 0) {
    PoolView v;
    for (std::size_t i = 0; i < seeds; ++i)
        v.seeds.push_back({"s" + std::to_string(i), "Seed instruction " + std::to_string(i),
                           InstructionSource::seed_commit});
    for (std::size_t i = 0; i < generated; ++i)
        v.generated.push_back({"g" + std::to_string(i), "Generated instruction " + std::to_string(i),
                               InstructionSource::generated});
    return v;
}

}  // namespace

TEST(Grammar, NumberedList) {
    auto items = parse_numbered_list("1. Add a docstring to f\n2) Rename variable x to count\nnoise\n");
    ASSERT_EQ(items.size(), 2u);
    EXPECT_EQ(items[0], "Add a docstring to f");
    EXPECT_EQ(items[1], "Rename variable x to count");
    EXPECT_TRUE(parse_numbered_list("Here are some ideas about code.").empty());
}

TEST(Grammar, ScenariosFallBackToLines) {
    auto s = parse_scenarios("- web server\n* batch job\n\ncli tool\n", 10);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0], "web server");
    EXPECT_EQ(parse_scenarios("1. a\n2. b\n3. c\n", 2).size(), 2u);
}

TEST(Grammar, FencedBlocks) {
    auto b = extract_fenced_blocks("x\n```python\na = 1\n```\ntext\n```\na = 2\n```\n```\nopen");
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0], "a = 1");
    EXPECT_EQ(b[1], "a = 2");
}

TEST(Grammar, NormalizeAndLabels) {
    EXPECT_EQ(normalize_instruction("  \"add   a test.\" "), "Add a test");
    EXPECT_EQ(clean_rewrite("\n  add a null-check before dereferencing conn. Then more.\nx"),
              "Add a null-check before dereferencing conn");
    const auto labels = default_intent_labels();
    EXPECT_EQ(labels.size(), 27u);
    EXPECT_EQ(match_label("add documentation", labels), "Add Documentation");
    EXPECT_FALSE(match_label("something else entirely", labels).has_value());
}

TEST(Orchestrator, TwoCandidatesFromNumberedList) {
    StageMock m;
    m.answers[PromptKind::instruction_gen] =
        "1. Add a docstring to the parse function\n2. Rename variable x to total";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    Rng rng(1);
    ExchangeLog log;
    auto r = o.bootstrap_instructions(seed_view(12, 3), rng, 0, log);
    ASSERT_FALSE(r.failure.has_value());
    ASSERT_EQ(r.candidates.size(), 2u);
    EXPECT_EQ(r.seed_exemplars, 7u);
    EXPECT_EQ(r.generated_exemplars, 1u);
    EXPECT_EQ(r.candidates[0].exemplar_ids, r.exemplar_ids);
    EXPECT_EQ(log.entries().size(), 1u);
}

TEST(Orchestrator, ProseRetriesThenSkips) {
    StageMock m;
    m.answers[PromptKind::instruction_gen] = "Sure, I can help with that request.";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    Rng rng(1);
    ExchangeLog log;
    auto r = o.bootstrap_instructions(seed_view(10), rng, 0, log);
    EXPECT_TRUE(r.candidates.empty());
    EXPECT_TRUE(r.failure.has_value());
    EXPECT_EQ(r.exchange_ids.size(), 3u);
    EXPECT_EQ(m.client.calls(), 3u);
}

TEST(Orchestrator, AllSeedFallbackWithoutGenerated) {
    StageMock m;
    m.answers[PromptKind::instruction_gen] = "1. Add logging to the loader";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    Rng rng(4);
    auto r = o.bootstrap_instructions(seed_view(10), rng, 0, log);
    EXPECT_EQ(r.seed_exemplars, 8u);
    EXPECT_EQ(r.generated_exemplars, 0u);
    EXPECT_FALSE(r.failure.has_value());

    // With exactly seven seeds every seed is an exemplar.
    Rng rng7(4);
    auto r7 = o.bootstrap_instructions(seed_view(7), rng7, 0, log);
    EXPECT_EQ(r7.seed_exemplars, 7u);
    std::set<std::string> ids(r7.exemplar_ids.begin(), r7.exemplar_ids.end());
    EXPECT_EQ(ids.size(), 7u);
    EXPECT_EQ(r7.candidates.size(), 1u);
}

TEST(Orchestrator, SteeringRotatesAndSkipsOther) {
    StageMock m;
    m.answers[PromptKind::instruction_gen] = "1. x y z";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    Rng rng(1);
    EXPECT_EQ(o.bootstrap_instructions(seed_view(8), rng, 0, log).intent_hint, "Add Functionality");
    EXPECT_EQ(o.bootstrap_instructions(seed_view(8), rng, 26, log).intent_hint, "Add Functionality");
    EXPECT_EQ(o.bootstrap_instructions(seed_view(8), rng, 1, log).intent_hint, "Optimize Performance");
}

TEST(Orchestrator, TenScenariosReproducible) {
    StageMock m;
    std::string ten;
    for (int i = 1; i <= 10; ++i) ten += std::to_string(i) + ". scenario number " + std::to_string(i) + "\n";
    m.answers[PromptKind::scenario_gen] = ten;
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    Rng a(42), b(42);
    auto ra = o.generate_scenarios("Add caching", a, log);
    auto rb = o.generate_scenarios("Add caching", b, log);
    ASSERT_EQ(ra.scenarios.size(), 10u);
    EXPECT_EQ(ra.selected, rb.selected);
    EXPECT_EQ(std::count_if(ra.scenarios.begin(), ra.scenarios.end(), [](auto& s) { return s.selected; }), 1);
    EXPECT_FALSE(ra.degenerate);
}

TEST(Orchestrator, FourScenarios) {
    StageMock m;
    m.answers[PromptKind::scenario_gen] = "1. a\n2. b\n3. c\n4. d\n";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    Rng rng(1);
    auto r = o.generate_scenarios("Add caching", rng, log);
    EXPECT_EQ(r.scenarios.size(), 4u);
    EXPECT_FALSE(r.selected.empty());
}

TEST(Orchestrator, EmptyScenariosDegenerateButInstanceStillRuns) {
    StageMock m;
    m.answers[PromptKind::instance_gen] = "```python\nx = 1\n```\n```python\nx = 2\n```";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    Rng rng(1);
    auto s = o.generate_scenarios("Add caching", rng, log);
    EXPECT_TRUE(s.degenerate);
    EXPECT_TRUE(s.selected.empty());
    auto inst = o.generate_instance("Add caching", s.selected, log);
    EXPECT_TRUE(inst.ok());
    EXPECT_EQ(inst.input_code, "x = 1");
    EXPECT_EQ(inst.output_code, "x = 2");
}

TEST(Orchestrator, InstanceDiscards) {
    StageMock m;
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    m.answers[PromptKind::instance_gen] = "```\nsame\n```\n```\nsame\n```";
    EXPECT_EQ(o.generate_instance("Do it", "", log).discard, InstanceDiscard::input_equals_output);
    m.answers[PromptKind::instance_gen] = "```\nonly one\n```";
    auto r = o.generate_instance("Do it", "", log);
    EXPECT_EQ(r.discard, InstanceDiscard::block_count);
    EXPECT_EQ(r.exchange_ids.size(), 3u);
    EXPECT_THROW(o.generate_instance("  ", "", log), ContractViolation);
}

TEST(Orchestrator, RewriteCommitMessage) {
    StageMock m;
    m.answers[PromptKind::message_rewrite] = "Add a null-check before dereferencing conn.";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    CommitRecord rec;
    rec.message = "fix";
    rec.file_path = "db.py";
    rec.content_before = "conn.close()";
    rec.content_after = "if conn is not None:\n    conn.close()";
    auto r = o.rewrite_commit_message(rec, log);
    EXPECT_EQ(r.instruction, "Add a null-check before dereferencing conn");

    m.answers[PromptKind::message_rewrite] = "";
    EXPECT_TRUE(o.rewrite_commit_message(rec, log).parked());
}

TEST(Orchestrator, PreciseMessageEchoed) {
    // An echoing backend returns the message it was given.
    MockChatClient client([](std::string_view prompt) {
        auto at = prompt.find("Commit message: ");
        auto end = prompt.find('\n', at);
        return std::string(prompt.substr(at + 16, end - at - 16));
    });
    Orchestrator o(client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    CommitRecord rec;
    rec.message = "  rename   helper to load_config ";
    rec.content_before = "a";
    rec.content_after = "b";
    EXPECT_EQ(o.rewrite_commit_message(rec, log).instruction,
              normalize_instruction(rec.message));
}

TEST(Orchestrator, ClassifyIntent) {
    StageMock m;
    m.answers[PromptKind::intent_classify] = "Add Documentation";
    Orchestrator o(m.client, PromptLibrary{}, fast_settings());
    ExchangeLog log;
    auto r = o.classify_intent("add docstring to the function", log);
    EXPECT_EQ(r.label, "Add Documentation");
    EXPECT_FALSE(r.fallback);

    m.answers[PromptKind::intent_classify] = "Gardening";
    auto off = o.classify_intent("add docstring to the function", log);
    EXPECT_EQ(off.label, "Other");
    EXPECT_TRUE(off.fallback);
    EXPECT_EQ(off.exchange_ids.size(), 2u);

    EXPECT_THROW(o.classify_intent(" ", log), ContractViolation);
}

TEST(Orchestrator, TransportErrorsExhaustToBackend) {
    MockChatClient client([](std::string_view) { return std::string("1. x"); });
    client.fail_after(0);
    auto s = fast_settings();
    s.transport_retries = 2;
    Orchestrator o(client, PromptLibrary{}, s);
    ExchangeLog log;
    Rng rng(1);
    try {
        o.bootstrap_instructions(seed_view(8), rng, 0, log);
        FAIL() << "expected backend error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::backend);
    }
    EXPECT_EQ(client.calls(), 3u);
}

TEST(MockClient, FixturesByPromptHash) {
    fx::TempDir dir;
    nlohmann::json fx = {{MockChatClient::prompt_key("hello"), "world"}};
    fx::write_text(dir / "fx.json", fx.dump());
    MockChatClient c;
    c.load_fixtures(dir / "fx.json");
    EXPECT_EQ(c.complete({"hello"}).text, "world");
    EXPECT_EQ(c.complete({"unknown"}).text, "");
}

TEST(Exchange, IdsAreContentHashes) {
    ExchangeLog a, b;
    auto& x = a.record("judge", "p", "r", "mock", 0.0, 0);
    auto& y = b.record("judge", "p", "r", "mock", 0.0, 0);
    EXPECT_EQ(x.id, y.id);
    EXPECT_NE(x.id, b.record("judge", "p", "r", "mock", 0.0, 1).id);
}

TEST(Synthetic, DeterministicAndWellFormed) {
    PromptLibrary lib;
    auto prompt = render(lib.get(PromptKind::instance_gen),
                         {{"instruction", "Add type hints to the parse function"}, {"scenario", "cli"}});
    EXPECT_EQ(synthetic_response(prompt), synthetic_response(prompt));
    auto scen = render(lib.get(PromptKind::scenario_gen), {{"instruction", "Add caching"}});
    EXPECT_FALSE(parse_scenarios(synthetic_response(scen), 10).empty());
}

TEST(Prompts, RenderLeavesUnknownBraces) {
    PromptTemplate t{PromptKind::judge, "{instruction} {x} {output}"};
    EXPECT_EQ(render(t, {{"instruction", "{output}"}, {"output", "o"}}), "{output} {x} o");
}

TEST(Prompts, DirectoryOverrides) {
    fx::TempDir dir;
    fx::write_text(dir / "judge.txt", "custom {instruction}");
    auto lib = PromptLibrary::from_directory(dir.path());
    EXPECT_EQ(lib.get(PromptKind::judge).body, "custom {instruction}");
    EXPECT_EQ(lib.get(PromptKind::scenario_gen).body, default_template(PromptKind::scenario_gen).body);
}
