#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gdl/criteria.hpp"

namespace gdl {

/// Piecewise-linear weight per criterion as a function of iteration.
///
/// Before the first breakpoint the first weight applies, after the last one the
/// last weight. A criterion without breakpoints has weight 0.
class WeightSchedule {
public:
    using Breakpoints = std::vector<std::pair<int, double>>;

    WeightSchedule() = default;

    /// Constant weights.
    static WeightSchedule constant(const WeightMap& weights);

    /// Throws InvalidArgument unless iterations strictly increase and weights are >= 0.
    void set(CriterionId c, Breakpoints points);
    const Breakpoints& breakpoints(CriterionId c) const { return points_[c]; }

    double weight(CriterionId c, int iteration) const;
    WeightMap at(int iteration) const;

    /// Iteration of the last breakpoint over all criteria; weights are constant afterwards.
    int last_change() const;
    bool empty() const;

    friend bool operator==(const WeightSchedule&, const WeightSchedule&) = default;

private:
    PerCriterion<Breakpoints> points_;
};

enum class DescentMode { full, stochastic };

struct OptimizerConfig {
    double lr = 0.05;
    int iters = 2000;
    DescentMode mode = DescentMode::full;
    int batch = 64;            ///< sampled terms per criterion in stochastic mode
    std::uint64_t seed = 0;    ///< drives stochastic sampling
    double lr_decay = 0.999;   ///< multiplicative per iteration, in (0, 1]
    int snapshot_every = 10;
    bool keep_snapshots = false;
    int separator_steps = 30;                  ///< M-step iterations per outer iteration
    std::optional<int> crossing_refresh;       ///< default: 1 if |E| <= 200 else 10
    double convergence_tol = 1e-7;             ///< on max coordinate displacement
    int convergence_window = 50;
    NpConfig np;
    Hyper hyper;
    Exec exec = Exec::parallel;

    void validate() const;
};

struct TraceEntry {
    int iteration = 0;
    double total = 0.0;
    PerCriterion<double> losses;          ///< unweighted loss per criterion (0 when inactive)
    PerCriterion<bool> active;            ///< weight > 0 at this iteration
    std::optional<std::size_t> snapshot;  ///< index into RunTrace::snapshots
};

struct RunTrace {
    std::vector<TraceEntry> entries;
    std::vector<Layout> snapshots;
};

/// Weighted sum of the active criteria.
struct TotalLoss {
    double value = 0.0;
    Gradient grad;
    PerCriterion<double> losses;
    PerCriterion<bool> active;
};

/// value = sum w_c L_c and grad = sum w_c grad L_c; zero-weight criteria are not evaluated.
TotalLoss total_loss_and_grad(const EvalContext& ctx, const Layout& x, const WeightMap& weights);

/// Stochastic counterpart: every active criterion contributes its sampled estimate.
TotalLoss total_loss_and_grad_sampled(const EvalContext& ctx, const Layout& x, const WeightMap& weights,
                                      std::mt19937_64& rng, int batch);

/// Crossing set and separators carried across iterations.
struct CriterionState {
    std::vector<CrossingPair> crossings;
    CrossingSeparators separators;
    int refreshed_at = -1;
};

/// One gradient step X - lr * grad. Throws NumericalDivergence on non-finite values.
Layout step(const EvalContext& ctx, const Layout& x, const WeightMap& weights, double lr, DescentMode mode,
            std::mt19937_64& rng, int batch, int iteration = 0);

/// Uniform [0,1)^2 positions, deterministic per seed on every platform.
Layout random_layout(int n, std::uint64_t seed);

enum class RunStatus { converged, iteration_cap, diverged };
std::string_view to_string(RunStatus s);

/// Drives an optimization one iteration at a time.
///
/// run() is a loop over step(); the session service drives the same object so
/// an uninterrupted session reproduces run() exactly.
class Runner {
public:
    Runner(const Graph& g, const DistanceMatrix& d, Layout init, WeightSchedule schedule, OptimizerConfig cfg);

    /// Performs one iteration. `override_weights` replaces the schedule for this step.
    /// Returns false once finished (cap, convergence or divergence).
    bool step(const WeightMap* override_weights = nullptr);

    bool done() const { return status_.has_value(); }
    std::optional<RunStatus> status() const { return status_; }
    const std::string& failure() const { return failure_; }

    int iteration() const { return iteration_; }
    const Layout& layout() const { return layout_; }
    const RunTrace& trace() const { return trace_; }
    const CriterionState& state() const { return state_; }
    const OptimizerConfig& config() const { return cfg_; }
    const WeightSchedule& schedule() const { return schedule_; }
    const Graph& graph() const { return *graph_; }
    const DistanceMatrix& distances() const { return *dist_; }

    /// Loss values of the most recent step, at the layout it started from.
    const TotalLoss& last_loss() const { return last_; }

    /// Moves a node between iterations and pins it for `hold` further iterations.
    void set_position(int node, Vec2 p, int hold = 0);

    /// Adds the final trace entry at the current layout. Idempotent.
    void finish_trace();

    /// Clears a finished state so iteration can continue (e.g. after a drag in a finished session).
    void reopen();

private:
    EvalContext context() const;
    void record(int iteration, const TotalLoss& loss, const Layout& at);

    const Graph* graph_;
    const DistanceMatrix* dist_;
    Layout layout_;
    WeightSchedule schedule_;
    OptimizerConfig cfg_;
    CriterionState state_;
    std::mt19937_64 rng_;
    RunTrace trace_;
    TotalLoss last_;
    std::vector<int> pinned_;  // remaining hold iterations per node
    int iteration_ = 0;
    int still_ = 0;
    int refresh_every_ = 1;
    bool force_refresh_ = true;
    bool finished_trace_ = false;
    std::optional<RunStatus> status_;
    std::string failure_;
};

struct RunResult {
    Layout layout;
    RunTrace trace;
    RunStatus status = RunStatus::iteration_cap;
    int iterations = 0;
    std::string failure;
};

RunResult run(const Graph& g, const DistanceMatrix& d, const Layout& init, const WeightSchedule& schedule,
              const OptimizerConfig& cfg);
RunResult run(const Graph& g, const Layout& init, const WeightSchedule& schedule, const OptimizerConfig& cfg);

}  // namespace gdl
