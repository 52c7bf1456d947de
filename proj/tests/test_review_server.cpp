#include <httplib.h>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "editforge/review_server.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;
using namespace editforge::review;

namespace {

struct Service {
    fx::TempDir dir;
    std::unique_ptr<ReviewStore> store;
    std::unique_ptr<ReviewServer> server;
    int port = 0;

    Service() { open(); }

    void open() {
        store = std::make_unique<ReviewStore>(dir / "review");
        ServerConfig cfg;
        cfg.port = 0;
        cfg.seed_pool_path = dir / "seeds.jsonl";
        server = std::make_unique<ReviewServer>(*store, cfg);
        port = server->start();
    }

    void restart() {
        server->stop();
        server.reset();
        store.reset();
        open();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(std::chrono::seconds(10));
        return c;
    }

    std::pair<int, nlohmann::json> post(const std::string& path, const nlohmann::json& body) const {
        auto res = client().Post(path.c_str(), body.dump(), "application/json");
        if (!res) return {0, {}};
        return {res->status, res->body.empty() ? nlohmann::json() : nlohmann::json::parse(res->body)};
    }

    std::pair<int, nlohmann::json> get(const std::string& path, const std::string& reviewer = {}) const {
        httplib::Headers h;
        if (!reviewer.empty()) h.emplace("X-Reviewer-Id", reviewer);
        auto res = client().Get(path.c_str(), h);
        if (!res) return {0, {}};
        return {res->status, nlohmann::json::parse(res->body)};
    }
};

nlohmann::json seed_payload(int i) {
    auto inst = fx::make_instance(static_cast<std::size_t>(i));
    return {{"instruction", inst.instruction}, {"input", inst.input_code}, {"output", inst.output_code}};
}

}  // namespace

TEST(ReviewApi, EnqueuePendingDecide) {
    Service svc;
    auto [st, created] = svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(1)}});
    ASSERT_EQ(st, 201);
    const std::string id = created["item_id"];
    auto [st2, again] = svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(1)}});
    EXPECT_EQ(st2, 200);
    EXPECT_EQ(again["item_id"], id);

    auto [pst, pending] = svc.get("/api/pending?kind=seed_candidate&limit=10", "ann");
    ASSERT_EQ(pst, 200);
    ASSERT_EQ(pending["items"].size(), 1u);
    EXPECT_EQ(pending["items"][0]["diff"]["n_diff"], 1);

    auto [dst, decided] = svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "ann"}, {"action", "accept"}});
    ASSERT_EQ(dst, 200);
    EXPECT_EQ(decided["status"], "accepted");
    EXPECT_TRUE(svc.get("/api/pending", "ann").second["items"].empty());

    auto [ist, item] = svc.get("/api/item/" + id);
    EXPECT_EQ(ist, 200);
    EXPECT_EQ(item["decisions"].size(), 1u);
}

TEST(ReviewApi, ErrorStatuses) {
    Service svc;
    EXPECT_EQ(svc.post("/api/decision", {{"item_id", "it-nope"}, {"reviewer_id", "a"}, {"action", "accept"}}).first, 404);
    EXPECT_EQ(svc.get("/api/item/it-nope").first, 404);
    auto [st, err] = svc.post("/api/enqueue", {{"kind", "eval_score"},
                                               {"payload", {{"anon_id", "x"}, {"instruction", "i"}, {"input", "a"},
                                                            {"output", "b"}, {"model", "secret"}}}});
    EXPECT_EQ(st, 400);
    EXPECT_EQ(err["error"], "data");
    EXPECT_EQ(svc.get("/api/pending?kind=bogus").first, 400);

    auto id = svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(2)}}).second["item_id"];
    svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "ann"}, {"action", "accept"}});
    EXPECT_EQ(svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "bob"}, {"action", "reject"}}).first, 409);
    EXPECT_EQ(svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "ann"}, {"action", "shrug"}}).first, 400);

    auto raw = svc.client().Post("/api/decision", "{not json", "application/json");
    ASSERT_TRUE(raw);
    EXPECT_EQ(raw->status, 400);
}

TEST(ReviewApi, DecisionSurvivesRestart) {
    Service svc;
    auto id = svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(3)}}).second["item_id"];
    svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(4)}});
    svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "ann"}, {"action", "accept"}});
    svc.restart();
    auto pending = svc.get("/api/pending").second["items"];
    ASSERT_EQ(pending.size(), 1u);
    EXPECT_NE(pending[0]["item_id"], id);
    EXPECT_EQ(svc.get("/api/item/" + id.get<std::string>()).second["status"], "accepted");
    auto stats = svc.get("/api/stats").second;
    EXPECT_EQ(stats["items"], 2);
    EXPECT_EQ(stats["pending"], 1);
}

TEST(ReviewApi, PromoteWritesSeedPool) {
    Service svc;
    fx::write_seed_pool(svc.dir / "seeds.jsonl", 3, 0);
    auto id = svc.post("/api/enqueue", {{"kind", "seed_candidate"}, {"payload", seed_payload(5)}}).second["item_id"];
    auto [st0, none] = svc.post("/api/promote", nlohmann::json::object());
    EXPECT_EQ(st0, 200);
    EXPECT_EQ(none["promoted"], 0);
    svc.post("/api/decision", {{"item_id", id}, {"reviewer_id", "ann"}, {"action", "accept"}});
    auto [st, out] = svc.post("/api/promote", nlohmann::json::object());
    EXPECT_EQ(st, 200);
    EXPECT_EQ(out["promoted"], 1);
    auto pool = read_corpus(svc.dir / "seeds.jsonl");
    EXPECT_EQ(pool.size(), 4u);
    EXPECT_EQ(pool.back().source, Source::curated_seed);
}

TEST(ReviewApi, EvalItemsHideModel) {
    Service svc;
    std::vector<EvalSample> samples{{"s1", "Add a test", "x = 1", "x = 2", "secret-model-7"}};
    Rng rng(1);
    auto sheet = EvalSheet::create(samples, rng);
    enqueue_eval_sheet(*svc.store, sheet);
    auto items = svc.get("/api/pending?kind=eval_score", "r1").second["items"];
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].dump().find("secret-model-7"), std::string::npos);
    auto [st, res] = svc.post("/api/decision", {{"item_id", items[0]["item_id"]},
                                                {"reviewer_id", "r1"}, {"action", "accept"}, {"score", "partial"}});
    EXPECT_EQ(st, 200);
    EXPECT_EQ(res["scores_received"], 1);
    EXPECT_TRUE(svc.get("/api/pending?kind=eval_score", "r1").second["items"].empty());
    EXPECT_EQ(svc.get("/api/pending?kind=eval_score", "r2").second["items"].size(), 1u);
}
