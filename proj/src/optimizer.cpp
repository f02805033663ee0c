#include "gdl/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "gdl/error.hpp"

namespace gdl {

// ---- schedule ---------------------------------------------------------------

WeightSchedule WeightSchedule::constant(const WeightMap& weights) {
    WeightSchedule s;
    for (auto c : kAllCriteria)
        if (weights[c] != 0.0) s.set(c, {{0, weights[c]}});
    return s;
}

void WeightSchedule::set(CriterionId c, Breakpoints points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].second >= 0.0) || !std::isfinite(points[i].second))
            throw InvalidArgument(fmt::format("{} weight must be finite and >= 0", name(c)));
        if (i > 0 && points[i].first <= points[i - 1].first)
            throw InvalidArgument(fmt::format("{} breakpoints must be strictly increasing in iteration", name(c)));
    }
    points_[c] = std::move(points);
}

double WeightSchedule::weight(CriterionId c, int iteration) const {
    const auto& p = points_[c];
    if (p.empty()) return 0.0;
    if (iteration <= p.front().first) return p.front().second;
    if (iteration >= p.back().first) return p.back().second;
    auto it = std::upper_bound(p.begin(), p.end(), iteration,
                               [](int t, const std::pair<int, double>& bp) { return t < bp.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double f = static_cast<double>(iteration - lo.first) / static_cast<double>(hi.first - lo.first);
    return lo.second + f * (hi.second - lo.second);
}

WeightMap WeightSchedule::at(int iteration) const {
    WeightMap w;
    for (auto c : kAllCriteria) w[c] = weight(c, iteration);
    return w;
}

int WeightSchedule::last_change() const {
    int last = 0;
    for (auto c : kAllCriteria)
        if (!points_[c].empty()) last = std::max(last, points_[c].back().first);
    return last;
}

bool WeightSchedule::empty() const {
    for (auto c : kAllCriteria)
        for (const auto& bp : points_[c])
            if (bp.second > 0.0) return false;
    return true;
}

void OptimizerConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be > 0");
    if (iters < 1) throw InvalidArgument("iteration count must be >= 1");
    if (batch < 1) throw InvalidArgument("batch must be >= 1");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("lr_decay must be in (0, 1]");
    if (snapshot_every < 1) throw InvalidArgument("snapshot cadence must be >= 1");
    if (separator_steps < 0) throw InvalidArgument("separator steps must be >= 0");
    if (crossing_refresh && *crossing_refresh < 1) throw InvalidArgument("crossing refresh must be >= 1");
    hyper.validate();
}

// ---- objective --------------------------------------------------------------

namespace {

void accumulate(TotalLoss& total, CriterionId c, double w, const LossResult& r) {
    total.value += w * r.value;
    for (std::size_t i = 0; i < total.grad.size(); ++i) total.grad[i] += w * r.grad[i];
    total.losses[c] = r.value;
    total.active[c] = true;
}

void check_weights(const WeightMap& weights) {
    for (auto c : kAllCriteria)
        if (!(weights[c] >= 0.0) || !std::isfinite(weights[c]))
            throw InvalidArgument(fmt::format("{} weight must be finite and >= 0", name(c)));
}

}  // namespace

TotalLoss total_loss_and_grad(const EvalContext& ctx, const Layout& x, const WeightMap& weights) {
    check_weights(weights);
    TotalLoss total;
    total.grad.assign(x.size(), Vec2{});
    for (auto c : kAllCriteria) {
        const double w = weights[c];
        if (w == 0.0) continue;
        accumulate(total, c, w, evaluate(c, ctx, x));
    }
    return total;
}

TotalLoss total_loss_and_grad_sampled(const EvalContext& ctx, const Layout& x, const WeightMap& weights,
                                      std::mt19937_64& rng, int batch) {
    check_weights(weights);
    TotalLoss total;
    total.grad.assign(x.size(), Vec2{});
    for (auto c : kAllCriteria) {
        const double w = weights[c];
        if (w == 0.0) continue;
        accumulate(total, c, w, evaluate_sampled(c, ctx, x, rng, batch));
    }
    return total;
}

namespace {

void require_finite(const TotalLoss& loss, int iteration) {
    if (!std::isfinite(loss.value)) throw NumericalDivergence(iteration, "non-finite objective");
    if (!all_finite(loss.grad)) throw NumericalDivergence(iteration, "non-finite gradient");
}

}  // namespace

Layout step(const EvalContext& ctx, const Layout& x, const WeightMap& weights, double lr, DescentMode mode,
            std::mt19937_64& rng, int batch, int iteration) {
    const TotalLoss loss = mode == DescentMode::full ? total_loss_and_grad(ctx, x, weights)
                                                     : total_loss_and_grad_sampled(ctx, x, weights, rng, batch);
    require_finite(loss, iteration);
    Layout out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lr * loss.grad[i];
    if (!all_finite(out)) throw NumericalDivergence(iteration, "non-finite layout");
    return out;
}

Layout random_layout(int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("random layout needs n >= 1");
    std::mt19937_64 rng(seed);
    // 53 high bits -> [0, 1); avoids the implementation-defined real distributions.
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Layout x(static_cast<std::size_t>(n));
    for (auto& p : x) {
        p.x = unit();
        p.y = unit();
    }
    return x;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return "converged";
        case RunStatus::iteration_cap: return "iteration_cap";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

// ---- runner -----------------------------------------------------------------

Runner::Runner(const Graph& g, const DistanceMatrix& d, Layout init, WeightSchedule schedule, OptimizerConfig cfg)
    : graph_(&g), dist_(&d), layout_(std::move(init)), schedule_(std::move(schedule)), cfg_(std::move(cfg)),
      rng_(cfg_.seed), pinned_(static_cast<std::size_t>(g.node_count()), 0) {
    cfg_.validate();
    validate_layout(g, layout_);
    if (d.size() != g.node_count()) throw InvalidArgument("distance matrix size does not match graph");
    refresh_every_ = cfg_.crossing_refresh.value_or(g.edge_count() <= 200 ? 1 : 10);
    last_.grad.assign(layout_.size(), Vec2{});
}

EvalContext Runner::context() const {
    EvalContext ctx;
    ctx.graph = graph_;
    ctx.distances = dist_;
    ctx.np = cfg_.np;
    ctx.hyper = cfg_.hyper;
    ctx.crossings = &state_.crossings;
    ctx.separators = &state_.separators;
    ctx.exec = cfg_.exec;
    return ctx;
}

void Runner::record(int iteration, const TotalLoss& loss, const Layout& at) {
    TraceEntry e;
    e.iteration = iteration;
    e.total = loss.value;
    e.losses = loss.losses;
    e.active = loss.active;
    if (cfg_.keep_snapshots) {
        e.snapshot = trace_.snapshots.size();
        trace_.snapshots.push_back(at);
    }
    trace_.entries.push_back(std::move(e));
}

bool Runner::step(const WeightMap* override_weights) {
    if (status_) return false;
    if (iteration_ >= cfg_.iters) {
        status_ = RunStatus::iteration_cap;
        finish_trace();
        return false;
    }
    const int t = iteration_;
    const WeightMap weights = override_weights ? *override_weights : schedule_.at(t);
    const double lr = cfg_.lr * std::pow(cfg_.lr_decay, t);

    try {
        if (weights[CriterionId::CN] > 0.0 || weights[CriterionId::CAM] > 0.0) {
            if (force_refresh_ || state_.refreshed_at < 0 || t - state_.refreshed_at >= refresh_every_) {
                state_.crossings = detect_crossings(*graph_, layout_, cfg_.exec);
                state_.refreshed_at = t;
                force_refresh_ = false;
            }
            if (weights[CriterionId::CN] > 0.0) {
                state_.separators = fit_separators(*graph_, layout_, state_.crossings, state_.separators,
                                                   {cfg_.separator_steps, lr});
            }
        }
        const auto ctx = context();
        TotalLoss loss = cfg_.mode == DescentMode::full
                             ? total_loss_and_grad(ctx, layout_, weights)
                             : total_loss_and_grad_sampled(ctx, layout_, weights, rng_, cfg_.batch);
        require_finite(loss, t);
        if (t % cfg_.snapshot_every == 0) record(t, loss, layout_);

        double moved = 0.0;
        Layout next = layout_;
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (pinned_[i] > 0) continue;
            const Vec2 delta = lr * loss.grad[i];
            next[i] -= delta;
            moved = std::max({moved, std::abs(delta.x), std::abs(delta.y)});
        }
        if (!all_finite(next)) throw NumericalDivergence(t, "non-finite layout");
        layout_ = std::move(next);
        last_ = std::move(loss);
        for (auto& p : pinned_)
            if (p > 0) --p;
        ++iteration_;

        still_ = moved < cfg_.convergence_tol ? still_ + 1 : 0;
        const bool schedule_settled = override_weights != nullptr || t >= schedule_.last_change();
        if (still_ >= cfg_.convergence_window && schedule_settled) status_ = RunStatus::converged;
        else if (iteration_ >= cfg_.iters) status_ = RunStatus::iteration_cap;
    } catch (const NumericalDivergence& e) {
        status_ = RunStatus::diverged;
        failure_ = e.what();
        return false;
    } catch (const CoincidentNodes& e) {
        status_ = RunStatus::diverged;
        failure_ = fmt::format("iteration {}: {}", t, e.what());
        return false;
    } catch (const DegenerateLayout& e) {
        status_ = RunStatus::diverged;
        failure_ = fmt::format("iteration {}: {}", t, e.what());
        return false;
    }
    if (status_) finish_trace();
    return !status_.has_value();
}

void Runner::finish_trace() {
    if (finished_trace_) return;
    finished_trace_ = true;
    if (!trace_.entries.empty() && trace_.entries.back().iteration >= iteration_) return;
    try {
        const int t = std::max(0, iteration_ - 1);
        const WeightMap weights = schedule_.at(t);
        CriterionState final_state = state_;
        if (weights[CriterionId::CN] > 0.0 || weights[CriterionId::CAM] > 0.0) {
            final_state.crossings = detect_crossings(*graph_, layout_, cfg_.exec);
            if (weights[CriterionId::CN] > 0.0)
                final_state.separators = fit_separators(*graph_, layout_, final_state.crossings,
                                                        final_state.separators, {0, cfg_.lr});
        }
        EvalContext ctx = context();
        ctx.crossings = &final_state.crossings;
        ctx.separators = &final_state.separators;
        record(iteration_, total_loss_and_grad(ctx, layout_, weights), layout_);
    } catch (const Error&) {
        // Final evaluation is informational; a degenerate final layout leaves the trace as is.
    }
}

void Runner::set_position(int node, Vec2 p, int hold) {
    if (node < 0 || node >= graph_->node_count())
        throw InvalidArgument(fmt::format("node {} out of range", node));
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("position must be finite");
    if (hold < 0) throw InvalidArgument("hold must be >= 0");
    layout_[static_cast<std::size_t>(node)] = p;
    pinned_[static_cast<std::size_t>(node)] = hold;
    force_refresh_ = true;
    still_ = 0;
}

void Runner::reopen() {
    if (!status_ || *status_ == RunStatus::iteration_cap) return;
    if (*status_ == RunStatus::converged && finished_trace_ && !trace_.entries.empty() &&
        trace_.entries.back().iteration == iteration_ && iteration_ % cfg_.snapshot_every != 0)
        trace_.entries.pop_back();
    status_.reset();
    failure_.clear();
    finished_trace_ = false;
    still_ = 0;
}

RunResult run(const Graph& g, const DistanceMatrix& d, const Layout& init, const WeightSchedule& schedule,
              const OptimizerConfig& cfg) {
    Runner runner(g, d, init, schedule, cfg);
    while (runner.step()) {
    }
    RunResult out;
    out.layout = runner.layout();
    out.trace = runner.trace();
    out.status = *runner.status();
    out.iterations = runner.iteration();
    out.failure = runner.failure();
    return out;
}

RunResult run(const Graph& g, const Layout& init, const WeightSchedule& schedule, const OptimizerConfig& cfg) {
    const DistanceMatrix d = shortest_paths(g);
    return run(g, d, init, schedule, cfg);
}

}  // namespace gdl
