#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "gdl/exec.hpp"
#include "gdl/geometry.hpp"
#include "gdl/graph.hpp"
#include "gdl/loss.hpp"

namespace gdl {

enum class CriterionId { ST, IL, NP, CN, CAM, AR, ANR, VR, GA };

inline constexpr std::array<CriterionId, 9> kAllCriteria = {
    CriterionId::ST, CriterionId::IL,  CriterionId::NP, CriterionId::CN, CriterionId::CAM,
    CriterionId::AR, CriterionId::ANR, CriterionId::VR, CriterionId::GA};

std::string_view name(CriterionId c);
std::optional<CriterionId> criterion_from_string(std::string_view s);

/// Quality direction: NP, AR, ANR, VR and GA are better when larger.
bool higher_is_better(CriterionId c);

inline constexpr std::size_t index_of(CriterionId c) { return static_cast<std::size_t>(c); }

/// Fixed-size map keyed by criterion.
template <typename T>
struct PerCriterion {
    std::array<T, 9> values{};
    T& operator[](CriterionId c) { return values[index_of(c)]; }
    const T& operator[](CriterionId c) const { return values[index_of(c)]; }
    friend bool operator==(const PerCriterion&, const PerCriterion&) = default;
};

using WeightMap = PerCriterion<double>;

struct Hyper {
    double angular_sensitivity = 1.0;        ///< s in e^{-s phi}
    std::optional<double> target_resolution; ///< r; defaults to 1/sqrt(n)
    int rotations = 7;                       ///< sampled rotations for aspect ratio

    double resolution_for(int n) const;
    void validate() const;
};

/// Neighbourhood size. Empty k means each node uses its own degree.
struct NpConfig {
    std::optional<int> k;
};

/// Per-node neighbourhood sizes after resolving NpConfig against the graph.
std::vector<int> resolve_neighborhood_sizes(const Graph& g, const NpConfig& cfg);

struct Separator {
    Vec2 w;
    double b = 0.0;
};

/// Linear separators keyed by crossing pair.
using CrossingSeparators = std::map<CrossingPair, Separator>;

struct SeparatorFit {
    int steps = 30;
    double lr = 0.05;
};

// ---- losses -----------------------------------------------------------------

LossResult loss_stress(const Graph& g, const DistanceMatrix& d, const Layout& x, Exec exec = Exec::parallel);

/// Uses the graph's ideal lengths, or the current mean edge length held constant.
LossResult loss_ideal_edge_length(const Graph& g, const Layout& x);

/// Lovász hinge between the k-NN prediction scores and the adjacency matrix.
LossResult loss_neighborhood(const Graph& g, const Layout& x, const NpConfig& cfg, Exec exec = Exec::parallel);

/// Prediction scores K̂ (row-major n x n, zero diagonal) for the given per-node sizes.
std::vector<double> neighborhood_scores(const Layout& x, const std::vector<int>& sizes, Exec exec = Exec::parallel);

/// Hinge terms of one crossing pair against its separator, without the ||w||^2 term.
double separator_hinge(const Graph& g, const Layout& x, const CrossingPair& pair, const Separator& sep);

/// E-step loss over the given pairs: hinge terms plus ||w||^2, gradient w.r.t. X only.
/// Throws InvalidArgument if a pair has no separator.
LossResult loss_crossings(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs,
                          const CrossingSeparators& seps);
/// Same, over the currently detected crossings.
LossResult loss_crossings(const Graph& g, const Layout& x, const CrossingSeparators& seps);

/// Boundary perpendicular to the segment joining the two edge midpoints, through their mean.
Separator initial_separator(const Graph& g, const Layout& x, const CrossingPair& pair);

/// M step: keep separators of pairs still listed, create missing ones, then run
/// fit.steps gradient steps on each pair's hinge + ||w||^2.
CrossingSeparators fit_separators(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs,
                                  const CrossingSeparators& seps, const SeparatorFit& fit = {});
CrossingSeparators fit_separators(const Graph& g, const Layout& x, const CrossingSeparators& seps,
                                  const SeparatorFit& fit = {});

/// Squared cosines of the crossing angles over a frozen crossing set.
LossResult loss_crossing_angle(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs);
LossResult loss_crossing_angle(const Graph& g, const Layout& x);

/// Cross entropy of the soft box proportions against [0.5, 0.5], summed over rotations.
LossResult loss_aspect_ratio(const Layout& x, const Hyper& hyper);

/// Total angular energy sum e^{-s phi} over incident edge pairs.
LossResult loss_angular_resolution(const Graph& g, const Layout& x, const Hyper& hyper);

/// sum_{i<j} ReLU(1 - |X_i - X_j| / (r d_max))^2 with d_max frozen.
LossResult loss_vertex_resolution(const Layout& x, const Hyper& hyper, Exec exec = Exec::parallel);

LossResult loss_gabriel(const Graph& g, const Layout& x, Exec exec = Exec::parallel);

// ---- uniform dispatch -------------------------------------------------------

/// Everything a criterion may need besides the layout.
struct EvalContext {
    const Graph* graph = nullptr;
    const DistanceMatrix* distances = nullptr;
    NpConfig np;
    Hyper hyper;
    const std::vector<CrossingPair>* crossings = nullptr;  ///< frozen crossing set for CN and CAM
    const CrossingSeparators* separators = nullptr;        ///< for CN
    Exec exec = Exec::parallel;
};

LossResult evaluate(CriterionId c, const EvalContext& ctx, const Layout& x);

/// Unbiased estimate from `batch` terms drawn uniformly with replacement and
/// scaled by terms/batch. IL, NP and AR are not term sums and are evaluated in full.
LossResult evaluate_sampled(CriterionId c, const EvalContext& ctx, const Layout& x, std::mt19937_64& rng,
                            int batch);

/// Number of additive terms a criterion decomposes into for the current layout
/// (0 for criteria evaluated in full).
std::size_t term_count(CriterionId c, const EvalContext& ctx);

// ---- quality ----------------------------------------------------------------

double quality(CriterionId c, const Graph& g, const DistanceMatrix& d, const Layout& x, const NpConfig& np = {},
               const Hyper& hyper = {});

PerCriterion<double> quality_all(const Graph& g, const DistanceMatrix& d, const Layout& x, const NpConfig& np = {},
                                 const Hyper& hyper = {});

// Individual measures, usable without a distance matrix where possible.
double stress_value(const DistanceMatrix& d, const Layout& x);
double ideal_edge_length_value(const Graph& g, const Layout& x);
double neighborhood_jaccard(const Graph& g, const Layout& x, const NpConfig& np = {});
double crossing_angle_quality(const Graph& g, const Layout& x);
double aspect_ratio_quality(const Layout& x, int rotations = 7);
double angular_resolution_quality(const Graph& g, const Layout& x);
double vertex_resolution_quality(const Layout& x, double target_resolution);
double gabriel_quality(const Graph& g, const Layout& x);

}  // namespace gdl
