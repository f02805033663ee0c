#pragma once

// Pairwise kernels behind the O(n^2) and O(|E| n) criteria.
//
// Each kernel has a serial reference (straight i < j loops, single accumulator)
// and an OpenMP variant. The OpenMP variants are owner-computes: every thread
// writes only the gradient rows it owns, and per-row value partials are summed
// serially in row order. Results therefore do not depend on the thread count.

#include <vector>

#include "gdl/graph.hpp"
#include "gdl/loss.hpp"

namespace gdl::kernels {

/// Pairs closer than this are treated as coincident by the stress gradient.
inline constexpr double kCoincidentTolerance = 1e-9;

/// sum_{i<j} d_ij^-2 (|X_i - X_j| - d_ij)^2. Throws CoincidentNodes.
LossResult stress_serial(const Layout& x, const DistanceMatrix& d);
LossResult stress_omp(const Layout& x, const DistanceMatrix& d);

/// sum_{i<j} ReLU(1 - |X_i - X_j| / scale)^2 with scale = r * d_max held fixed.
LossResult vertex_resolution_serial(const Layout& x, double scale);
LossResult vertex_resolution_omp(const Layout& x, double scale);

/// sum over edges (i,j) and k not in {i,j} of ReLU(r_ij - |X_k - c_ij|)^2.
LossResult gabriel_serial(const Graph& g, const Layout& x);
LossResult gabriel_omp(const Graph& g, const Layout& x);

/// Gradient of a function of pairwise distances given d f / d |X_i - X_j| for
/// every ordered pair as a row-major n x n matrix (both (i,j) and (j,i) entries
/// contribute). Coincident pairs contribute nothing.
Gradient distance_chain_serial(const Layout& x, const std::vector<double>& coeff);
Gradient distance_chain_omp(const Layout& x, const std::vector<double>& coeff);

/// Max pairwise distance.
double diameter_serial(const Layout& x);
double diameter_omp(const Layout& x);

}  // namespace gdl::kernels
