#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "editforge/dataset.hpp"
#include "editforge/review.hpp"

namespace editforge::review {

struct ServerConfig {
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8080;
    /// Built review-ui assets, served at / when the directory exists.
    std::optional<std::filesystem::path> static_dir;
    /// Seed pool (corpus JSON-lines) that promotion reads and rewrites.
    std::filesystem::path seed_pool_path = "seeds.jsonl";
    PoolConfig pool;
};

/// HTTP JSON API over a ReviewStore:
///
///   GET  /api/pending?kind=&limit=   items awaiting the X-Reviewer-Id reviewer
///   POST /api/decision               {item_id, reviewer_id, action, edited_payload?, score?}
///   POST /api/promote                admit accepted items into the seed pool file
///   GET  /api/stats
///   GET  /api/item/{id}
///   POST /api/enqueue                {kind, payload}
///
/// Errors come back as {"error": category, "message": ...} with 400, 404,
/// 409 or 500.
class ReviewServer {
public:
    ReviewServer(ReviewStore& store, ServerConfig config);
    ~ReviewServer();

    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds the socket; returns the bound port. Throws Error{io} on failure.
    int bind();
    /// Serves until stop(); call bind() first.
    void listen();
    /// bind() and serve on a background thread.
    int start();
    void stop();

    /// Loads the seed pool file, promotes accepted items into it and writes
    /// it back. Also used by the CLI.
    PromotionSummary promote();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace editforge::review
