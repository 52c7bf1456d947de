#include "editforge/review_server.hpp"

#include <httplib.h>

#include <thread>

#include <spdlog/spdlog.h>

#include "editforge/error.hpp"

namespace editforge::review {
namespace {

int http_status(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::not_found: return 404;
        case ErrorCategory::conflict: return 409;
        case ErrorCategory::data:
        case ErrorCategory::contract:
        case ErrorCategory::config: return 400;
        default: return 500;
    }
}

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCategory c, const std::string& message) {
    send_json(res, {{"error", to_string(c)}, {"message", message}}, http_status(c));
}

// Wraps a handler so every failure becomes a JSON error body.
template <class F>
httplib::Server::Handler guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e.category(), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, ErrorCategory::data, std::string("malformed JSON: ") + e.what());
        } catch (const std::exception& e) {
            spdlog::error("review server: {}", e.what());
            send_error(res, ErrorCategory::internal, e.what());
        }
    };
}

nlohmann::json parse_body(const httplib::Request& req) {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCategory::data, "request body must be a JSON object");
    return j;
}

}  // namespace

struct ReviewServer::Impl {
    ReviewStore& store;
    ServerConfig config;
    httplib::Server server;
    std::thread thread;
    std::mutex promote_mu;
    int bound_port = -1;

    Impl(ReviewStore& s, ServerConfig c) : store(s), config(std::move(c)) {}

    PromotionSummary promote() {
        std::lock_guard lock(promote_mu);
        TaskPool pool(config.pool);
        if (std::filesystem::exists(config.seed_pool_path)) {
            for (auto& inst : read_corpus(config.seed_pool_path)) {
                if (!is_seed(inst.source))
                    throw Error(ErrorCategory::data,
                                "seed pool contains a non-seed instance " + inst.id);
                pool.restore(std::move(inst));
            }
        }
        auto summary = store.promote_accepted(pool);
        if (summary.promoted > 0 || !std::filesystem::exists(config.seed_pool_path))
            write_corpus(config.seed_pool_path, pool.instances());
        spdlog::info("promoted {} item(s), {} rejected; seed pool now {}", summary.promoted,
                     summary.rejected.size(), pool.size());
        return summary;
    }

    void routes() {
        server.Get("/api/pending", guarded([this](const httplib::Request& req,
                                                  httplib::Response& res) {
            std::optional<ItemKind> kind;
            if (req.has_param("kind") && !req.get_param_value("kind").empty()) {
                kind = parse_item_kind(req.get_param_value("kind"));
                if (!kind)
                    throw Error(ErrorCategory::data,
                                "kind: unknown item kind '" + req.get_param_value("kind") + "'");
            }
            std::size_t limit = 50;
            if (req.has_param("limit")) {
                try {
                    limit = std::stoul(req.get_param_value("limit"));
                } catch (const std::exception&) {
                    throw Error(ErrorCategory::data, "limit: must be a non-negative integer");
                }
            }
            const std::string reviewer = req.get_header_value("X-Reviewer-Id");
            nlohmann::json items = nlohmann::json::array();
            for (const auto& it : store.pending(kind, limit, reviewer))
                items.push_back(item_to_json(it));
            send_json(res, {{"items", items}});
        }));

        server.Post("/api/decision", guarded([this](const httplib::Request& req,
                                                    httplib::Response& res) {
            auto body = parse_body(req);
            Decision d;
            d.item_id = body.at("item_id").get<std::string>();
            d.reviewer_id = body.value("reviewer_id", req.get_header_value("X-Reviewer-Id"));
            auto action = parse_action(body.value("action", ""));
            if (!action) throw Error(ErrorCategory::data, "action: must be accept, reject or edit");
            d.action = *action;
            if (auto it = body.find("edited_payload"); it != body.end() && !it->is_null())
                d.edited_payload = *it;
            if (auto it = body.find("score"); it != body.end() && !it->is_null()) {
                auto s = parse_human_score(it->get<std::string>());
                if (!s) throw Error(ErrorCategory::data, "score: must be correct, partial or wrong");
                d.score = *s;
            }
            send_json(res, item_to_json(store.submit(std::move(d)), true));
        }));

        server.Post("/api/promote", guarded([this](const httplib::Request&,
                                                   httplib::Response& res) {
            auto summary = promote();
            nlohmann::json rejected = nlohmann::json::array();
            for (const auto& [id, reason] : summary.rejected)
                rejected.push_back({{"item_id", id}, {"reason", reason}});
            send_json(res, {{"promoted", summary.promoted}, {"rejected", rejected}});
        }));

        server.Get("/api/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
            auto s = store.stats();
            send_json(res, {{"items", s.items},
                            {"pending", s.pending},
                            {"reviewed", s.items - s.pending},
                            {"decisions", s.decisions_logged},
                            {"promoted", s.promoted},
                            {"promotion_rejected", s.promotion_rejected},
                            {"reviewers", s.reviewers},
                            {"by_kind", s.by_kind}});
        }));

        server.Get(R"(/api/item/([A-Za-z0-9_-]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto it = store.item(req.matches[1]);
                       if (!it)
                           throw Error(ErrorCategory::not_found,
                                       "no review item " + std::string(req.matches[1]));
                       send_json(res, item_to_json(*it, true));
                   }));

        server.Post("/api/enqueue", guarded([this](const httplib::Request& req,
                                                   httplib::Response& res) {
            auto body = parse_body(req);
            auto kind = parse_item_kind(body.value("kind", ""));
            if (!kind) throw Error(ErrorCategory::data, "kind: unknown item kind");
            if (!body.contains("payload")) throw Error(ErrorCategory::data, "payload: required");
            auto r = store.enqueue(*kind, body["payload"]);
            send_json(res, {{"item_id", r.item_id}, {"created", r.created}}, r.created ? 201 : 200);
        }));

        if (config.static_dir && std::filesystem::is_directory(*config.static_dir)) {
            if (!server.set_mount_point("/", config.static_dir->string()))
                spdlog::warn("cannot serve static assets from {}", config.static_dir->string());
        }
    }
};

ReviewServer::ReviewServer(ReviewStore& store, ServerConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {
    impl_->routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
    auto& s = impl_->server;
    int port = impl_->config.port;
    if (port == 0) {
        port = s.bind_to_any_port(impl_->config.host);
    } else if (!s.bind_to_port(impl_->config.host, port)) {
        port = -1;
    }
    if (port < 0)
        throw Error(ErrorCategory::io, "cannot bind " + impl_->config.host + ":" +
                                           std::to_string(impl_->config.port));
    impl_->bound_port = port;
    return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

int ReviewServer::start() {
    int port = bind();
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
    return port;
}

void ReviewServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

PromotionSummary ReviewServer::promote() { return impl_->promote(); }

}  // namespace editforge::review
