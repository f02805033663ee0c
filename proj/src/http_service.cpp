#include "gdl/http_service.hpp"

#include <httplib.h>

#include <fmt/core.h>

#include "gdl/error.hpp"
#include "gdl/io.hpp"

namespace gdl::service {

using nlohmann::json;

namespace {

int param(const json& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end()) return 0;
    if (!it->is_number_integer()) throw InvalidArgument(fmt::format("params.{} must be an integer", key));
    return it->get<int>();
}

Graph graph_from_family(const json& body) {
    const json& fam = body.at("family");
    if (!fam.is_string()) throw InvalidArgument("family must be a string");
    const auto family = family_from_string(fam.get<std::string>());
    if (!family) throw InvalidArgument(fmt::format("unknown family '{}'", fam.get<std::string>()));
    const json params = body.value("params", json::object());
    if (!params.is_object()) throw InvalidArgument("params must be an object");
    FamilyParams p;
    p.n = param(params, "n");
    p.w = param(params, "w");
    p.h = param(params, "h");
    p.branch = param(params, "branch");
    p.depth = param(params, "depth");
    p.a = param(params, "a");
    p.b = param(params, "b");
    return generate(*family, p);
}

json losses_json(const PerCriterion<double>& losses, const PerCriterion<bool>& active) {
    json j = json::object();
    for (auto c : kAllCriteria)
        if (active[c]) j[std::string(name(c))] = losses[c];
    return j;
}

json positions_json(const Layout& x) {
    json j = json::array();
    for (const Vec2& p : x) j.push_back({p.x, p.y});
    return j;
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, std::string_view message) {
    reply(res, status, json{{"error", message}});
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw IoError(fmt::format("malformed JSON body: {}", e.what()));
    }
}

// Maps library errors to status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const json::exception& e) {
        fail(res, 400, e.what());
    } catch (const InvalidArgument& e) {
        fail(res, 400, e.what());
    } catch (const IoError& e) {
        fail(res, 400, e.what());
    } catch (const DisconnectedGraph& e) {
        fail(res, 400, e.what());
    } catch (const Error& e) {
        fail(res, 409, e.what());
    }
}

}  // namespace

SessionSpec spec_from_json(const json& body) {
    if (!body.is_object()) throw InvalidArgument("request body must be an object");
    SessionSpec spec;
    if (body.contains("graph")) spec.graph = io::read_graph(body.at("graph").dump());
    else if (body.contains("family")) spec.graph = graph_from_family(body);
    else throw InvalidArgument("request needs \"graph\" or \"family\"");

    if (body.contains("config")) spec.cfg = io::config_from_json(body.at("config"));
    if (body.contains("weights") && body.contains("schedule"))
        throw InvalidArgument("give either \"weights\" or \"schedule\", not both");
    if (body.contains("schedule")) spec.schedule = io::schedule_from_json(body.at("schedule"));
    else if (body.contains("weights")) spec.schedule = WeightSchedule::constant(io::weights_from_json(body.at("weights")));
    if (body.contains("init")) spec.init = io::read_layout(body.at("init").dump(), spec.graph).positions;
    return spec;
}

json info_to_json(const SessionInfo& info) {
    json j;
    j["id"] = info.id;
    j["status"] = to_string(info.status);
    j["iteration"] = info.iteration;
    j["nodes"] = info.node_count;
    j["weights"] = io::weights_to_json(info.effective_weights);
    j["override"] = info.override_weights.has_value();
    if (!info.failure.empty()) j["failure"] = info.failure;
    j["positions"] = positions_json(info.positions);
    return j;
}

json snapshot_to_json(const Snapshot& s) {
    json j;
    j["event"] = "snapshot";
    j["seq"] = s.seq;
    j["iteration"] = s.iteration;
    j["positions"] = positions_json(s.positions);
    j["losses"] = losses_json(s.losses, s.active);
    return j;
}

HttpService::HttpService(SessionManager& sessions, std::chrono::milliseconds heartbeat)
    : sessions_(sessions), heartbeat_(heartbeat), server_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpService::serve() { return server_->listen_after_bind(); }

void HttpService::stop() {
    if (server_) server_->stop();
}

bool HttpService::running() const { return server_->is_running(); }

void HttpService::routes() {
    auto& srv = *server_;
    const std::string id_re = "/sessions/([A-Za-z0-9_-]+)";

    auto with_session = [this](const httplib::Request& req, httplib::Response& res, auto&& f) {
        auto session = sessions_.find(req.matches[1]);
        if (!session) return fail(res, 404, fmt::format("unknown session '{}'", std::string(req.matches[1])));
        guarded(res, [&] { f(*session); });
    };

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto id = sessions_.create(spec_from_json(body_json(req)));
            reply(res, 201, info_to_json(sessions_.find(id)->info()));
        });
    });

    srv.Get(id_re, [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { reply(res, 200, info_to_json(s.info())); });
    });

    srv.Patch(id_re + "/weights", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            const auto body = body_json(req);
            const auto at = s.set_weights(io::weights_from_json(body.contains("weights") ? body.at("weights") : body));
            reply(res, 200, json{{"applies_at", at}});
        });
    });

    srv.Post(id_re + "/drag", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            const auto body = body_json(req);
            const json& x = body.at("x");
            const json& y = body.at("y");
            if (!x.is_number() || !y.is_number()) throw InvalidArgument("x and y must be numbers");
            const auto at = s.drag(body.at("node").get<int>(), {x.get<double>(), y.get<double>()},
                                   body.value("hold", 0));
            reply(res, 200, json{{"applies_at", at}});
        });
    });

    srv.Post(id_re + "/pause", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { reply(res, 200, json{{"applies_at", s.pause()}}); });
    });

    srv.Post(id_re + "/resume", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { reply(res, 200, json{{"applies_at", s.resume()}}); });
    });

    srv.Post(id_re + "/step", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            const auto body = body_json(req);
            if (s.info().status != SessionStatus::paused) return fail(res, 409, "session must be paused to step");
            reply(res, 200, json{{"iteration", s.advance(body.value("count", 1))}});
        });
    });

    srv.Delete(id_re, [this](const httplib::Request& req, httplib::Response& res) {
        if (!sessions_.remove(req.matches[1]))
            return fail(res, 404, fmt::format("unknown session '{}'", std::string(req.matches[1])));
        res.status = 204;
    });

    srv.Get(id_re + "/layout", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { res.set_content(s.layout_document(), "application/json"); });
    });

    srv.Get(id_re + "/svg", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            res.set_content(io::export_svg(s.graph(), s.info().positions), "image/svg+xml");
        });
    });

    srv.Get(id_re + "/stream", [this](const httplib::Request& req, httplib::Response& res) {
        auto session = sessions_.find(req.matches[1]);
        if (!session) return fail(res, 404, fmt::format("unknown session '{}'", std::string(req.matches[1])));
        const bool qualities = req.has_param("qualities") && req.get_param_value("qualities") != "0";
        struct Cursor {
            std::uint64_t seq = 0;
            bool ended = false;
        };
        auto cursor = std::make_shared<Cursor>();
        res.set_chunked_content_provider(
            "application/x-ndjson",
            [session, qualities, cursor, heartbeat = heartbeat_](std::size_t, httplib::DataSink& sink) {
                if (cursor->ended) {
                    sink.done();
                    return true;
                }
                auto write = [&sink](const json& j) {
                    const auto line = j.dump() + "\n";
                    return sink.write(line.data(), line.size());
                };
                const bool was_terminal = session->terminal();
                const auto wait = was_terminal ? std::chrono::milliseconds(0) : heartbeat;
                const auto batch = session->wait_snapshots(cursor->seq, wait);
                for (const auto& snap : batch) {
                    json j = snapshot_to_json(*snap);
                    if (qualities) {
                        try {
                            const auto& sp = session->spec();
                            const auto q = quality_all(session->graph(), session->distances(), snap->positions,
                                                       sp.cfg.np, sp.cfg.hyper);
                            json qj = json::object();
                            for (auto c : kAllCriteria) qj[std::string(name(c))] = q[c];
                            j["qualities"] = std::move(qj);
                        } catch (const Error& e) {
                            j["qualities_error"] = e.what();
                        }
                    }
                    if (!write(j)) return false;
                    cursor->seq = snap->seq;
                }
                if (!batch.empty()) return true;
                const auto info = session->info();
                // Snapshots published before the terminal state was observed have all been sent.
                if (was_terminal) {
                    json end{{"event", "end"}, {"iteration", info.iteration}};
                    end["status"] = session->closed() ? std::string("deleted") : std::string(to_string(info.status));
                    if (!info.failure.empty()) end["failure"] = info.failure;
                    cursor->ended = true;
                    if (!write(end)) return false;
                    sink.done();
                    return true;
                }
                return write(json{{"event", "heartbeat"}, {"iteration", info.iteration},
                                  {"status", to_string(info.status)}});
            });
    });
}

}  // namespace gdl::service
