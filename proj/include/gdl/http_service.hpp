#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <json.hpp>

#include "gdl/session.hpp"

namespace httplib {
class Server;
}

namespace gdl::service {

/// Builds a session spec from a create request body.
///
/// Body: {"graph": GraphFile} or {"family": name, "params": {...}}; optional
/// "init" (layout document), "weights" ({crit: w}) or "schedule" ({crit: [[it, w]...]}),
/// and "config" (optimizer config keys). Throws InvalidArgument or IoError.
SessionSpec spec_from_json(const nlohmann::json& body);

nlohmann::json info_to_json(const SessionInfo& info);
nlohmann::json snapshot_to_json(const Snapshot& s);

/// JSON control plane over a SessionManager.
///
/// POST   /sessions                 create (paused)
/// GET    /sessions/{id}            status, iteration, weights, positions
/// PATCH  /sessions/{id}/weights    {crit: w}
/// POST   /sessions/{id}/drag       {"node", "x", "y", "hold"}
/// POST   /sessions/{id}/pause | /resume
/// POST   /sessions/{id}/step       {"count"} while paused
/// DELETE /sessions/{id}
/// GET    /sessions/{id}/stream     one JSON object per line; ?qualities=1 adds qualities
/// GET    /sessions/{id}/layout     layout document
/// GET    /sessions/{id}/svg
class HttpService {
public:
    explicit HttpService(SessionManager& sessions,
                         std::chrono::milliseconds heartbeat = std::chrono::milliseconds(500));
    ~HttpService();

    /// Binds and serves until stop(). Returns false if the port cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds to a free port and returns it, or -1; call serve() afterwards.
    int bind_any_port(const std::string& host);
    bool serve();
    void stop();
    bool running() const;

private:
    void routes();

    SessionManager& sessions_;
    std::chrono::milliseconds heartbeat_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace gdl::service
