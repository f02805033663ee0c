#include "gdl/session.hpp"

#include <cmath>

#include <fmt/core.h>

#include "gdl/error.hpp"
#include "gdl/io.hpp"

namespace gdl::service {

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::running: return "running";
        case SessionStatus::paused: return "paused";
        case SessionStatus::finished: return "finished";
        case SessionStatus::failed: return "failed";
    }
    return "unknown";
}

Session::Session(std::string id, SessionSpec spec) : id_(std::move(id)), spec_(std::move(spec)) {
    spec_.cfg.validate();
    dist_ = shortest_paths(spec_.graph);
    Layout init = spec_.init ? *spec_.init : random_layout(spec_.graph.node_count(), spec_.cfg.seed);
    runner_ = std::make_unique<Runner>(spec_.graph, dist_, init, spec_.schedule, spec_.cfg);
    current_ = runner_->layout();
    worker_ = std::thread([this] { loop(); });
}

Session::~Session() { close(); }

void Session::close() {
    {
        std::lock_guard lk(mu_);
        if (stopping_) return;
        stopping_ = true;
    }
    wake_.notify_all();
    if (worker_.joinable()) worker_.join();
    std::lock_guard lk(mu_);
    for (auto& cmd : queue_) cmd.ack.set_exception(std::make_exception_ptr(Error("session closed")));
    queue_.clear();
    published_cv_.notify_all();
}

int Session::submit(std::function<void()> apply) {
    std::future<int> ack;
    {
        std::lock_guard lk(mu_);
        if (stopping_) throw Error("session closed");
        Command cmd{std::move(apply), {}};
        ack = cmd.ack.get_future();
        queue_.push_back(std::move(cmd));
    }
    wake_.notify_all();
    return ack.get();
}

bool Session::runnable() const {
    if (runner_->done()) return false;
    if (!override_) return true;
    for (auto c : kAllCriteria)
        if ((*override_)[c] > 0.0) return true;
    return false;
}

WeightMap Session::effective_weights() const {
    return override_ ? *override_ : spec_.schedule.at(iteration_);
}

void Session::loop() {
    std::unique_lock lk(mu_);
    for (;;) {
        wake_.wait(lk, [this] { return stopping_ || !queue_.empty() || (status_ == SessionStatus::running && runnable()); });
        if (stopping_) return;
        while (!queue_.empty()) {
            Command cmd = std::move(queue_.front());
            queue_.pop_front();
            lk.unlock();
            try {
                cmd.apply();
                lk.lock();
                cmd.ack.set_value(iteration_);
            } catch (...) {
                if (!lk.owns_lock()) lk.lock();
                cmd.ack.set_exception(std::current_exception());
            }
        }
        if (status_ == SessionStatus::running && runnable()) {
            lk.unlock();
            iterate();
            lk.lock();
        }
    }
}

void Session::iterate() {
    std::optional<WeightMap> weights;
    {
        std::lock_guard lk(mu_);
        weights = override_;
    }
    const int t = runner_->iteration();
    const bool on_cadence = t % spec_.cfg.snapshot_every == 0;
    Layout before = on_cadence ? runner_->layout() : Layout{};
    runner_->step(weights ? &*weights : nullptr);

    if (on_cadence && runner_->iteration() > t) {
        auto s = std::make_shared<Snapshot>();
        s->iteration = t;
        s->positions = std::move(before);
        s->losses = runner_->last_loss().losses;
        s->active = runner_->last_loss().active;
        publish(std::move(s));
    }
    if (runner_->done()) {
        const auto& entries = runner_->trace().entries;
        const int end = runner_->iteration();
        if (end % spec_.cfg.snapshot_every == 0 && end > t && !entries.empty() && entries.back().iteration == end) {
            auto s = std::make_shared<Snapshot>();
            s->iteration = end;
            s->positions = runner_->layout();
            s->losses = entries.back().losses;
            s->active = entries.back().active;
            publish(std::move(s));
        }
    }
    settle_status();
}

void Session::publish(SnapshotPtr s) {
    {
        std::lock_guard lk(mu_);
        auto copy = std::make_shared<Snapshot>(*s);
        copy->seq = next_seq_++;
        snapshots_.push_back(std::move(copy));
        while (snapshots_.size() > kRetainedSnapshots) snapshots_.pop_front();
    }
    published_cv_.notify_all();
}

// Copies runner-derived state under the lock. Worker thread only.
void Session::settle_status() {
    {
        std::lock_guard lk(mu_);
        iteration_ = runner_->iteration();
        current_ = runner_->layout();
        if (runner_->done()) {
            status_ = *runner_->status() == RunStatus::diverged ? SessionStatus::failed : SessionStatus::finished;
            failure_ = runner_->failure();
        }
    }
    published_cv_.notify_all();
}

int Session::set_weights(const WeightMap& w) {
    for (auto c : kAllCriteria)
        if (!(w[c] >= 0.0) || !std::isfinite(w[c]))
            throw InvalidArgument(fmt::format("{} weight must be finite and >= 0", name(c)));
    return submit([this, w] {
        bool reopened = false;
        if (runner_->done() && *runner_->status() == RunStatus::converged) {
            runner_->reopen();
            reopened = true;
        }
        std::lock_guard lk(mu_);
        override_ = w;
        if (reopened) {
            status_ = SessionStatus::running;
            failure_.clear();
        }
    });
}

int Session::drag(int node, Vec2 p, int hold) {
    if (node < 0 || node >= spec_.graph.node_count())
        throw InvalidArgument(fmt::format("node {} out of range", node));
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("position must be finite");
    if (hold < 0) throw InvalidArgument("hold must be >= 0");
    return submit([this, node, p, hold] {
        const bool was_done = runner_->done();
        runner_->set_position(node, p, hold);
        runner_->reopen();
        std::lock_guard lk(mu_);
        current_ = runner_->layout();
        if (was_done && !runner_->done()) {
            status_ = SessionStatus::running;
            failure_.clear();
        }
    });
}

int Session::pause() {
    return submit([this] {
        std::lock_guard lk(mu_);
        if (status_ == SessionStatus::running) status_ = SessionStatus::paused;
    });
}

int Session::resume() {
    return submit([this] {
        std::lock_guard lk(mu_);
        if (status_ == SessionStatus::paused) status_ = SessionStatus::running;
    });
}

int Session::advance(int count) {
    if (count < 1) throw InvalidArgument("step count must be >= 1");
    return submit([this, count] {
        {
            std::lock_guard lk(mu_);
            if (status_ != SessionStatus::paused) throw InvalidArgument("session must be paused to step");
        }
        for (int i = 0; i < count; ++i) {
            {
                std::lock_guard lk(mu_);
                if (!runnable()) break;
            }
            iterate();
        }
    });
}

SessionInfo Session::info() const {
    std::lock_guard lk(mu_);
    SessionInfo out;
    out.id = id_;
    out.status = status_;
    out.iteration = iteration_;
    out.node_count = spec_.graph.node_count();
    out.override_weights = override_;
    out.effective_weights = effective_weights();
    out.failure = failure_;
    out.positions = current_;
    return out;
}

std::string Session::layout_document() const {
    std::lock_guard lk(mu_);
    io::LayoutMeta meta;
    meta.seed = spec_.cfg.seed;
    meta.iterations = iteration_;
    meta.schedule = spec_.schedule;
    return io::write_layout(current_, meta);
}

bool Session::terminal() const {
    std::lock_guard lk(mu_);
    return stopping_ || status_ == SessionStatus::finished || status_ == SessionStatus::failed;
}

bool Session::closed() const {
    std::lock_guard lk(mu_);
    return stopping_;
}

std::vector<SnapshotPtr> Session::wait_snapshots(std::uint64_t after, std::chrono::milliseconds timeout) const {
    std::unique_lock lk(mu_);
    auto pending = [&] { return !snapshots_.empty() && snapshots_.back()->seq > after; };
    published_cv_.wait_for(lk, timeout, [&] {
        return pending() || stopping_ || status_ == SessionStatus::finished || status_ == SessionStatus::failed;
    });
    std::vector<SnapshotPtr> out;
    for (const auto& s : snapshots_)
        if (s->seq > after) out.push_back(s);
    return out;
}

// ---- manager ----------------------------------------------------------------

std::string SessionManager::create(SessionSpec spec) {
    std::string id;
    {
        std::lock_guard lk(mu_);
        id = fmt::format("s{}", ++counter_);
    }
    auto session = std::make_shared<Session>(id, std::move(spec));
    std::lock_guard lk(mu_);
    sessions_.emplace(id, std::move(session));
    return id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

bool SessionManager::remove(const std::string& id) {
    std::shared_ptr<Session> session;
    {
        std::lock_guard lk(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return false;
        session = std::move(it->second);
        sessions_.erase(it);
    }
    session->close();
    return true;
}

std::vector<std::string> SessionManager::ids() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

SessionManager::~SessionManager() {
    std::map<std::string, std::shared_ptr<Session>> all;
    {
        std::lock_guard lk(mu_);
        all.swap(sessions_);
    }
    for (auto& [id, s] : all) s->close();
}

}  // namespace gdl::service
