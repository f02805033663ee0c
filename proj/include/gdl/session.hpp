#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gdl/optimizer.hpp"

namespace gdl::service {

enum class SessionStatus { running, paused, finished, failed };
std::string_view to_string(SessionStatus s);

struct SessionSpec {
    Graph graph;
    std::optional<Layout> init;  ///< random_layout(n, cfg.seed) when empty
    WeightSchedule schedule;
    OptimizerConfig cfg;
};

/// Immutable state captured between two whole iterations.
struct Snapshot {
    std::uint64_t seq = 0;  ///< position in the session's event order
    int iteration = 0;
    Layout positions;
    PerCriterion<double> losses;  ///< at `positions`
    PerCriterion<bool> active;
};

using SnapshotPtr = std::shared_ptr<const Snapshot>;

/// Session-level view returned by status queries.
struct SessionInfo {
    std::string id;
    SessionStatus status = SessionStatus::paused;
    int iteration = 0;
    int node_count = 0;
    std::optional<WeightMap> override_weights;
    WeightMap effective_weights;
    std::string failure;
    Layout positions;  ///< current layout
};

/// One optimizer loop on its own thread.
///
/// Control calls enqueue a command and wait for the worker to apply it at an
/// iteration boundary; acknowledgements carry the iteration at which the change
/// takes effect. Only the worker touches the Runner.
class Session {
public:
    Session(std::string id, SessionSpec spec);
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const { return id_; }
    const Graph& graph() const { return spec_.graph; }
    const SessionSpec& spec() const { return spec_; }
    const DistanceMatrix& distances() const { return dist_; }

    /// Each returns the iteration at which the command applies.
    int set_weights(const WeightMap& w);
    int drag(int node, Vec2 p, int hold = 0);
    int pause();
    int resume();
    /// Runs `count` iterations while paused. Throws InvalidArgument when running.
    int advance(int count);

    SessionInfo info() const;

    /// Current layout as a layout document, equal to the CLI output for an uninterrupted run.
    std::string layout_document() const;

    /// Events with seq > `after`, oldest first. Waits up to `timeout` when none are pending.
    /// Snapshots older than the retention window are skipped.
    std::vector<SnapshotPtr> wait_snapshots(std::uint64_t after, std::chrono::milliseconds timeout) const;

    /// Finished, failed or closed.
    bool terminal() const;
    bool closed() const;

    /// Stops the worker; later control calls throw.
    void close();

    static constexpr std::size_t kRetainedSnapshots = 512;

private:
    struct Command {
        std::function<void()> apply;
        std::promise<int> ack;
    };

    int submit(std::function<void()> apply);
    void loop();
    bool runnable() const;
    void iterate();
    void publish(SnapshotPtr s);
    void settle_status();
    WeightMap effective_weights() const;

    std::string id_;
    SessionSpec spec_;
    DistanceMatrix dist_;
    std::unique_ptr<Runner> runner_;

    mutable std::mutex mu_;
    mutable std::condition_variable wake_;         // worker
    mutable std::condition_variable published_cv_; // stream readers
    std::deque<Command> queue_;
    SessionStatus status_ = SessionStatus::paused;
    std::optional<WeightMap> override_;
    std::deque<SnapshotPtr> snapshots_;
    std::uint64_t next_seq_ = 1;
    int iteration_ = 0;
    Layout current_;
    std::string failure_;
    bool stopping_ = false;
    std::thread worker_;
};

/// Owns every live session.
class SessionManager {
public:
    std::string create(SessionSpec spec);
    std::shared_ptr<Session> find(const std::string& id) const;
    /// Returns false for unknown ids.
    bool remove(const std::string& id);
    std::vector<std::string> ids() const;
    ~SessionManager();

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
};

}  // namespace gdl::service
