#include "gdl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gdl/error.hpp"

namespace gdl::kernels {

namespace {

inline std::size_t at(std::size_t i, std::size_t j, std::size_t n) { return i * n + j; }

double row_sum(const std::vector<double>& partial) {
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

// Smallest offending (i, j), i < j, across rows; -1 entries mean clean.
void throw_first_coincident(const std::vector<int>& bad) {
    std::pair<int, int> first{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    bool any = false;
    for (std::size_t i = 0; i < bad.size(); ++i) {
        if (bad[i] < 0) continue;
        const int a = std::min(static_cast<int>(i), bad[i]);
        const int b = std::max(static_cast<int>(i), bad[i]);
        if (!any || std::pair{a, b} < first) first = {a, b};
        any = true;
    }
    if (any) throw CoincidentNodes(first.first, first.second);
}

}  // namespace

LossResult stress_serial(const Layout& x, const DistanceMatrix& d) {
    const std::size_t n = x.size();
    auto out = LossResult::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 diff = x[i] - x[j];
            const double dist = norm(diff);
            if (dist < kCoincidentTolerance) throw CoincidentNodes(static_cast<int>(i), static_cast<int>(j));
            const double dij = d(static_cast<int>(i), static_cast<int>(j));
            const double w = 1.0 / (dij * dij);
            const double r = dist - dij;
            out.value += w * r * r;
            const Vec2 g = (2.0 * w * r / dist) * diff;
            out.grad[i] += g;
            out.grad[j] -= g;
        }
    }
    return out;
}

LossResult stress_omp(const Layout& x, const DistanceMatrix& d) {
    const int n = static_cast<int>(x.size());
    auto out = LossResult::zeros(x.size());
    std::vector<double> partial(x.size(), 0.0);
    std::vector<int> bad(x.size(), -1);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        Vec2 gi{};
        double vi = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const Vec2 diff = x[ii] - x[static_cast<std::size_t>(j)];
            const double dist = norm(diff);
            if (dist < kCoincidentTolerance) {
                if (bad[ii] < 0) bad[ii] = j;
                continue;
            }
            const double dij = d(i, j);
            const double w = 1.0 / (dij * dij);
            const double r = dist - dij;
            if (j > i) vi += w * r * r;
            gi += (2.0 * w * r / dist) * diff;
        }
        out.grad[ii] = gi;
        partial[ii] = vi;
    }
    throw_first_coincident(bad);
    out.value = row_sum(partial);
    return out;
}

LossResult vertex_resolution_serial(const Layout& x, double scale) {
    const std::size_t n = x.size();
    auto out = LossResult::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 diff = x[i] - x[j];
            const double dist = norm(diff);
            const double t = 1.0 - dist / scale;
            if (t <= 0.0) continue;
            out.value += t * t;
            if (dist == 0.0) continue;
            const Vec2 g = (-2.0 * t / (scale * dist)) * diff;
            out.grad[i] += g;
            out.grad[j] -= g;
        }
    }
    return out;
}

LossResult vertex_resolution_omp(const Layout& x, double scale) {
    const int n = static_cast<int>(x.size());
    auto out = LossResult::zeros(x.size());
    std::vector<double> partial(x.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        Vec2 gi{};
        double vi = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const Vec2 diff = x[ii] - x[static_cast<std::size_t>(j)];
            const double dist = norm(diff);
            const double t = 1.0 - dist / scale;
            if (t <= 0.0) continue;
            if (j > i) vi += t * t;
            if (dist == 0.0) continue;
            gi += (-2.0 * t / (scale * dist)) * diff;
        }
        out.grad[ii] = gi;
        partial[ii] = vi;
    }
    out.value = row_sum(partial);
    return out;
}

namespace {

struct EdgeDisk {
    Vec2 center;
    double radius;
    Vec2 unit;  // (X_i - X_j) / |X_i - X_j|
};

EdgeDisk edge_disk(const Graph& g, const Layout& x, int e) {
    const Edge& ed = g.edge(e);
    const Vec2 a = x[static_cast<std::size_t>(ed.u)];
    const Vec2 b = x[static_cast<std::size_t>(ed.v)];
    const double len = norm(a - b);
    if (len == 0.0) throw DegenerateLayout("zero-length edge (" + std::to_string(ed.u) + ", " + std::to_string(ed.v) + ")");
    return {0.5 * (a + b), 0.5 * len, (1.0 / len) * (a - b)};
}

}  // namespace

LossResult gabriel_serial(const Graph& g, const Layout& x) {
    const int n = static_cast<int>(x.size());
    auto out = LossResult::zeros(x.size());
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        const EdgeDisk disk = edge_disk(g, x, e);
        for (int k = 0; k < n; ++k) {
            if (k == ed.u || k == ed.v) continue;
            const Vec2 v = x[static_cast<std::size_t>(k)] - disk.center;
            const double dist = norm(v);
            const double delta = disk.radius - dist;
            if (delta <= 0.0) continue;
            out.value += delta * delta;
            const Vec2 vhat = dist > 0.0 ? (1.0 / dist) * v : Vec2{};
            const double c = 2.0 * delta;
            out.grad[static_cast<std::size_t>(k)] -= c * vhat;
            out.grad[static_cast<std::size_t>(ed.u)] += (0.5 * c) * (disk.unit + vhat);
            out.grad[static_cast<std::size_t>(ed.v)] += (0.5 * c) * (vhat - disk.unit);
        }
    }
    return out;
}

LossResult gabriel_omp(const Graph& g, const Layout& x) {
    const int n = static_cast<int>(x.size());
    const int m = g.edge_count();
    std::vector<EdgeDisk> disks;
    disks.reserve(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) disks.push_back(edge_disk(g, x, e));

    std::vector<double> edge_value(static_cast<std::size_t>(m), 0.0);
    std::vector<Vec2> grad_u(static_cast<std::size_t>(m)), grad_v(static_cast<std::size_t>(m));
    auto out = LossResult::zeros(x.size());

    // Endpoint contributions, owned per edge.
#pragma omp parallel for schedule(static)
    for (int e = 0; e < m; ++e) {
        const auto ee = static_cast<std::size_t>(e);
        const Edge& ed = g.edge(e);
        const EdgeDisk& disk = disks[ee];
        double val = 0.0;
        Vec2 gu{}, gv{};
        for (int k = 0; k < n; ++k) {
            if (k == ed.u || k == ed.v) continue;
            const Vec2 v = x[static_cast<std::size_t>(k)] - disk.center;
            const double dist = norm(v);
            const double delta = disk.radius - dist;
            if (delta <= 0.0) continue;
            val += delta * delta;
            const Vec2 vhat = dist > 0.0 ? (1.0 / dist) * v : Vec2{};
            gu += delta * (disk.unit + vhat);
            gv += delta * (vhat - disk.unit);
        }
        edge_value[ee] = val;
        grad_u[ee] = gu;
        grad_v[ee] = gv;
    }
    // Contributions to the intruding node, owned per node.
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        Vec2 gk{};
        for (int e = 0; e < m; ++e) {
            const Edge& ed = g.edge(e);
            if (k == ed.u || k == ed.v) continue;
            const EdgeDisk& disk = disks[static_cast<std::size_t>(e)];
            const Vec2 v = x[static_cast<std::size_t>(k)] - disk.center;
            const double dist = norm(v);
            const double delta = disk.radius - dist;
            if (delta <= 0.0 || dist == 0.0) continue;
            gk -= (2.0 * delta / dist) * v;
        }
        out.grad[static_cast<std::size_t>(k)] = gk;
    }
    for (int e = 0; e < m; ++e) {
        const auto ee = static_cast<std::size_t>(e);
        const Edge& ed = g.edge(e);
        out.grad[static_cast<std::size_t>(ed.u)] += grad_u[ee];
        out.grad[static_cast<std::size_t>(ed.v)] += grad_v[ee];
        out.value += edge_value[ee];
    }
    return out;
}

Gradient distance_chain_serial(const Layout& x, const std::vector<double>& coeff) {
    const std::size_t n = x.size();
    Gradient grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = coeff[at(i, j, n)] + coeff[at(j, i, n)];
            if (c == 0.0) continue;
            const Vec2 diff = x[i] - x[j];
            const double dist = norm(diff);
            if (dist == 0.0) continue;
            const Vec2 g = (c / dist) * diff;
            grad[i] += g;
            grad[j] -= g;
        }
    }
    return grad;
}

Gradient distance_chain_omp(const Layout& x, const std::vector<double>& coeff) {
    const int n = static_cast<int>(x.size());
    const auto nn = x.size();
    Gradient grad(nn);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        Vec2 gi{};
        for (std::size_t j = 0; j < nn; ++j) {
            if (j == ii) continue;
            const double c = coeff[at(ii, j, nn)] + coeff[at(j, ii, nn)];
            if (c == 0.0) continue;
            const Vec2 diff = x[ii] - x[j];
            const double dist = norm(diff);
            if (dist == 0.0) continue;
            gi += (c / dist) * diff;
        }
        grad[ii] = gi;
    }
    return grad;
}

double diameter_serial(const Layout& x) {
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) best = std::max(best, norm(x[i] - x[j]));
    return best;
}

double diameter_omp(const Layout& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> row(x.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double best = 0.0;
        for (int j = i + 1; j < n; ++j)
            best = std::max(best, norm(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]));
        row[static_cast<std::size_t>(i)] = best;
    }
    double best = 0.0;
    for (double v : row) best = std::max(best, v);
    return best;
}

}  // namespace gdl::kernels
