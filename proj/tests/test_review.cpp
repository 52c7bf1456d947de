#include <gtest/gtest.h>

#include "editforge/error.hpp"
#include "editforge/review.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;
using namespace editforge::review;

namespace {

nlohmann::json seed_payload(int i) {
    auto inst = fx::make_instance(static_cast<std::size_t>(i));
    return {{"instruction", inst.instruction}, {"input", inst.input_code}, {"output", inst.output_code}};
}

Decision decide(const std::string& item, const std::string& reviewer, Action action) {
    Decision d;
    d.item_id = item;
    d.reviewer_id = reviewer;
    d.action = action;
    return d;
}

ErrorCategory category_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    return ErrorCategory::internal;
}

std::size_t count_lines(const std::filesystem::path& p) {
    auto s = fx::read_text(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(ReviewStore, EnqueueIdempotent) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    auto a = store.enqueue(ItemKind::seed_candidate, seed_payload(1));
    EXPECT_TRUE(a.created);
    auto b = store.enqueue(ItemKind::seed_candidate, seed_payload(1));
    EXPECT_FALSE(b.created);
    EXPECT_EQ(a.item_id, b.item_id);
    EXPECT_EQ(store.items().size(), 1u);
    EXPECT_EQ(store.item(a.item_id)->status, ItemStatus::pending);
}

TEST(ReviewStore, SchemaErrors) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    nlohmann::json eval = {{"anon_id", "a1"}, {"instruction", "i"}, {"input", "x"}, {"output", "y"},
                           {"model_tag", "gpt"}};
    EXPECT_EQ(category_of([&] { store.enqueue(ItemKind::eval_score, eval); }), ErrorCategory::data);
    EXPECT_FALSE(validate_payload(ItemKind::eval_score, eval).empty());
    EXPECT_FALSE(validate_payload(ItemKind::seed_candidate, {{"instruction", "x"}}).empty());
    EXPECT_TRUE(validate_payload(ItemKind::seed_candidate, seed_payload(1)).empty());
}

TEST(ReviewStore, AcceptAndEdit) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    auto a = store.enqueue(ItemKind::seed_candidate, seed_payload(1)).item_id;
    auto b = store.enqueue(ItemKind::seed_candidate, seed_payload(2)).item_id;
    EXPECT_EQ(store.submit(decide(a, "ann", Action::accept)).status, ItemStatus::accepted);

    auto d = decide(b, "ann", Action::edit);
    d.edited_payload = nlohmann::json{{"output", "fixed = 1"}};
    auto it = store.submit(d);
    EXPECT_EQ(it.status, ItemStatus::edited);
    EXPECT_EQ(it.effective_payload()["output"], "fixed = 1");
    EXPECT_EQ(it.effective_payload()["instruction"], seed_payload(2)["instruction"]);
    EXPECT_TRUE(store.pending(std::nullopt, 10).empty());
}

TEST(ReviewStore, SameReviewerReplacesLogKeepsBoth) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    auto a = store.enqueue(ItemKind::seed_candidate, seed_payload(1)).item_id;
    store.submit(decide(a, "ann", Action::accept));
    auto it = store.submit(decide(a, "ann", Action::reject));
    EXPECT_EQ(it.status, ItemStatus::rejected);
    EXPECT_EQ(it.decisions.size(), 1u);
    EXPECT_EQ(count_lines(dir / "decisions.jsonl"), 2u);
    EXPECT_EQ(category_of([&] { store.submit(decide(a, "bob", Action::accept)); }), ErrorCategory::conflict);
}

TEST(ReviewStore, DecisionErrors) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    EXPECT_EQ(category_of([&] { store.submit(decide("it-missing", "ann", Action::accept)); }),
              ErrorCategory::not_found);
    auto a = store.enqueue(ItemKind::seed_candidate, seed_payload(1)).item_id;
    EXPECT_EQ(category_of([&] { store.submit(decide(a, "", Action::accept)); }), ErrorCategory::data);
    EXPECT_EQ(category_of([&] { store.submit(decide(a, "ann", Action::edit)); }), ErrorCategory::data);
}

TEST(ReviewStore, EvalScoresNeedThreeRaters) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    nlohmann::json eval = {{"anon_id", "a1"}, {"instruction", "i"}, {"input", "x"}, {"output", "y"}};
    auto id = store.enqueue(ItemKind::eval_score, eval).item_id;
    for (auto r : {"r1", "r2"}) {
        auto d = decide(id, r, Action::accept);
        d.score = HumanScore::partial;
        EXPECT_EQ(store.submit(d).status, ItemStatus::pending);
    }
    auto d = decide(id, "r3", Action::accept);
    d.score = HumanScore::correct;
    EXPECT_EQ(store.submit(d).status, ItemStatus::accepted);
    auto d4 = decide(id, "r4", Action::accept);
    d4.score = HumanScore::wrong;
    EXPECT_EQ(category_of([&] { store.submit(d4); }), ErrorCategory::conflict);
    auto no_score = decide(id, "r1", Action::accept);
    EXPECT_EQ(category_of([&] { store.submit(no_score); }), ErrorCategory::data);
}

TEST(ReviewStore, PromotionCases) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    TaskPool pool;
    pool.restore(fx::make_instance(0));
    EXPECT_EQ(store.promote_accepted(pool).promoted, 0u);

    std::vector<std::string> ids;
    for (int i = 1; i <= 3; ++i) ids.push_back(store.enqueue(ItemKind::seed_candidate, seed_payload(i)).item_id);
    auto dup = store.enqueue(ItemKind::rewrite_confirm,
                             {{"instruction", "Some other instruction text"},
                              {"input", fx::make_instance(0).input_code},
                              {"output", "changed"}}).item_id;
    for (const auto& id : ids) store.submit(decide(id, "ann", Action::accept));
    store.submit(decide(dup, "ann", Action::accept));

    auto s = store.promote_accepted(pool);
    EXPECT_EQ(s.promoted, 3u);
    ASSERT_EQ(s.rejected.size(), 1u);
    EXPECT_EQ(s.rejected[0].first, dup);
    EXPECT_EQ(s.rejected[0].second, "instance_dup");
    EXPECT_EQ(pool.size(), 4u);
    EXPECT_EQ(pool.count(Source::curated_seed), 3u);
    EXPECT_EQ(store.item(dup)->promotion.rejection, "instance_dup");

    // Nothing left to promote.
    EXPECT_EQ(store.promote_accepted(pool).promoted, 0u);
    EXPECT_EQ(category_of([&] { store.submit(decide(ids[0], "ann", Action::reject)); }),
              ErrorCategory::conflict);
}

TEST(ReviewStore, RestartRebuildsState) {
    fx::TempDir dir;
    std::string a, b;
    {
        ReviewStore store(dir.path(), 2);
        a = store.enqueue(ItemKind::seed_candidate, seed_payload(1)).item_id;
        b = store.enqueue(ItemKind::seed_candidate, seed_payload(2)).item_id;
        store.enqueue(ItemKind::seed_candidate, seed_payload(3));
        store.submit(decide(a, "ann", Action::accept));
        auto d = decide(b, "bob", Action::edit);
        d.edited_payload = nlohmann::json{{"instruction", "Edited instruction text"}};
        store.submit(d);
    }
    ReviewStore again(dir.path());
    EXPECT_EQ(again.items().size(), 3u);
    EXPECT_EQ(again.item(a)->status, ItemStatus::accepted);
    EXPECT_EQ(again.item(b)->status, ItemStatus::edited);
    EXPECT_EQ(again.item(b)->effective_payload()["instruction"], "Edited instruction text");
    EXPECT_EQ(again.pending(std::nullopt, 10).size(), 1u);
    EXPECT_EQ(again.stats().decisions_logged, 2u);
}

TEST(ReviewStore, EvalSheetRoundTrip) {
    fx::TempDir dir;
    ReviewStore store(dir.path());
    std::vector<EvalSample> samples{{"s1", "Add a test", "x = 1", "x = 2", "m1"},
                                    {"s2", "Add a log", "y = 1", "y = 2", "m2"}};
    Rng rng(1);
    auto sheet = EvalSheet::create(samples, rng);
    EXPECT_EQ(enqueue_eval_sheet(store, sheet), 2u);
    EXPECT_EQ(enqueue_eval_sheet(store, sheet), 0u);
    for (const auto& it : store.pending(ItemKind::eval_score, 10)) {
        EXPECT_EQ(it.payload.dump().find("m1"), std::string::npos);
        auto d = decide(it.item_id, "r1", Action::accept);
        d.score = HumanScore::correct;
        store.submit(d);
    }
    auto out = collect_eval_scores(store, sheet);
    EXPECT_EQ(out.accepted, 2u);
    EXPECT_EQ(sheet.records()[0].human_scores.at("r1"), HumanScore::correct);
}
