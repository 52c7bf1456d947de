#include <gtest/gtest.h>

#include "editforge/config.hpp"
#include "editforge/error.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;

namespace {

ErrorCategory category_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    return ErrorCategory::internal;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
    PipelineConfig cfg;
    auto j = to_json(cfg);
    EXPECT_EQ(j["thresholds"]["rouge_dup"], 0.7);
    EXPECT_EQ(j["thresholds"]["jaccard_dup"], 0.75);
    EXPECT_EQ(j["sampling"]["seeds_per_prompt"], 7);
    auto back = config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_NO_THROW(validate(cfg));
    EXPECT_EQ(cfg.state_dir(), std::filesystem::path("out") / "state");
}

TEST(Config, UnknownKeyAndBadType) {
    EXPECT_EQ(category_of([] { config_from_json({{"thresholds", {{"rouge", 0.5}}}}); }), ErrorCategory::config);
    EXPECT_EQ(category_of([] { config_from_json({{"seed", "abc"}}); }), ErrorCategory::config);
}

TEST(Config, Validation) {
    PipelineConfig cfg;
    cfg.thresholds.rouge_dup = 0.0;
    EXPECT_EQ(category_of([&] { validate(cfg); }), ErrorCategory::config);
    cfg = {};
    cfg.minhash.num_perm = 8;
    EXPECT_EQ(category_of([&] { validate(cfg); }), ErrorCategory::config);
    cfg = {};
    cfg.llm.backend = "http";
    EXPECT_EQ(category_of([&] { validate(cfg); }), ErrorCategory::config);
    cfg.llm.endpoint = "http://localhost:1/v1/chat/completions";
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, FieldsAndOverrides) {
    auto fields = config_fields();
    auto has = [&](const std::string& k) {
        return std::any_of(fields.begin(), fields.end(), [&](auto& f) { return f.first == k; });
    };
    EXPECT_TRUE(has("thresholds.rouge_dup"));
    EXPECT_TRUE(has("llm.backend"));
    EXPECT_TRUE(has("mine.licenses"));

    auto j = nlohmann::json(to_json(PipelineConfig{}));
    apply_override(j, "sampling.steer_intents", "no");
    apply_override(j, "target_count", "77");
    apply_override(j, "mine.licenses", "MIT,Apache-2.0");
    apply_override(j, "thresholds.rouge_dup", "0.6");
    auto cfg = config_from_json(j);
    EXPECT_FALSE(cfg.sampling.steer_intents);
    EXPECT_EQ(cfg.target_count, 77u);
    EXPECT_EQ(cfg.mine.licenses, (std::vector<std::string>{"MIT", "Apache-2.0"}));
    EXPECT_EQ(cfg.thresholds.rouge_dup, 0.6);

    EXPECT_EQ(category_of([&] { apply_override(j, "target_count", "-3"); }), ErrorCategory::config);
    EXPECT_EQ(category_of([&] { apply_override(j, "no.such.key", "1"); }), ErrorCategory::config);
}

TEST(Config, LoadLayers) {
    fx::TempDir dir;
    fx::write_text(dir / "c.json", R"({"seed": 7, "llm": {"max_retries": 1}})");
    auto cfg = load_config(dir / "c.json", {{"seed", "9"}});
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.llm.max_retries, 1u);
    EXPECT_EQ(cfg.llm.transport_retries, 5u);
    EXPECT_EQ(category_of([&] { load_config(dir / "missing.json"); }), ErrorCategory::io);
    fx::write_text(dir / "bad.json", "{oops");
    EXPECT_EQ(category_of([&] { load_config(dir / "bad.json"); }), ErrorCategory::config);
}
