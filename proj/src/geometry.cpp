#include "gdl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "gdl/error.hpp"

namespace gdl {

void validate_layout(const Graph& g, const Layout& layout) {
    if (layout.size() != static_cast<std::size_t>(g.node_count()))
        throw InvalidArgument(fmt::format("layout has {} rows, graph has {} nodes", layout.size(), g.node_count()));
    if (!all_finite(layout)) throw InvalidArgument("layout contains non-finite coordinates");
}

int orientation(Vec2 p, Vec2 q, Vec2 r) {
    const double o = cross(q - p, r - p);
    if (o > kOrientationTolerance) return 1;
    if (o < -kOrientationTolerance) return -1;
    return 0;
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 != 0 || o2 != 0 || o3 != 0 || o4 != 0) return false;

    // All four points collinear: overlap of positive length along the carrier line.
    Vec2 dir = b - a;
    if (norm(dir) <= kOrientationTolerance) dir = d - c;
    const double len = norm(dir);
    if (len <= kOrientationTolerance) return false;
    dir *= 1.0 / len;
    const double a0 = dot(a, dir), a1 = dot(b, dir);
    const double c0 = dot(c, dir), c1 = dot(d, dir);
    const double lo = std::max(std::min(a0, a1), std::min(c0, c1));
    const double hi = std::min(std::max(a0, a1), std::max(c0, c1));
    return hi - lo > kOrientationTolerance;
}

namespace {

bool edges_cross(const Graph& g, const Layout& x, int ea, int eb) {
    const Edge& e1 = g.edge(ea);
    const Edge& e2 = g.edge(eb);
    if (e1.u == e2.u || e1.u == e2.v || e1.v == e2.u || e1.v == e2.v) return false;
    return segments_cross(x[static_cast<std::size_t>(e1.u)], x[static_cast<std::size_t>(e1.v)],
                          x[static_cast<std::size_t>(e2.u)], x[static_cast<std::size_t>(e2.v)]);
}

}  // namespace

std::vector<CrossingPair> detect_crossings(const Graph& g, const Layout& layout, Exec exec) {
    validate_layout(g, layout);
    const int m = g.edge_count();
    std::vector<CrossingPair> out;
    if (exec == Exec::serial) {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                if (edges_cross(g, layout, a, b)) out.push_back({a, b});
        return out;
    }
    std::vector<std::vector<CrossingPair>> rows(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 8)
    for (int a = 0; a < m; ++a) {
        auto& row = rows[static_cast<std::size_t>(a)];
        for (int b = a + 1; b < m; ++b)
            if (edges_cross(g, layout, a, b)) row.push_back({a, b});
    }
    for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
    return out;
}

double crossing_angle(const Graph& g, const CrossingPair& pair, const Layout& layout) {
    const Edge& e1 = g.edge(pair.first);
    const Edge& e2 = g.edge(pair.second);
    const Vec2 a = layout[static_cast<std::size_t>(e1.v)] - layout[static_cast<std::size_t>(e1.u)];
    const Vec2 b = layout[static_cast<std::size_t>(e2.v)] - layout[static_cast<std::size_t>(e2.u)];
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw DegenerateLayout("zero-length edge in crossing pair");
    const double c = std::clamp(std::abs(dot(a, b)) / (na * nb), 0.0, 1.0);
    return std::acos(c);
}

std::vector<IncidentAngle> incident_angles(const Graph& g, const Layout& layout) {
    validate_layout(g, layout);
    std::vector<IncidentAngle> out;
    for (int j = 0; j < g.node_count(); ++j) {
        const auto& nb = g.neighbors(j);
        const Vec2 pj = layout[static_cast<std::size_t>(j)];
        for (std::size_t p = 0; p < nb.size(); ++p) {
            const Vec2 a = layout[static_cast<std::size_t>(nb[p])] - pj;
            if (norm(a) == 0.0) throw DegenerateLayout(fmt::format("zero-length edge ({}, {})", j, nb[p]));
            for (std::size_t q = p + 1; q < nb.size(); ++q) {
                const Vec2 b = layout[static_cast<std::size_t>(nb[q])] - pj;
                if (norm(b) == 0.0) throw DegenerateLayout(fmt::format("zero-length edge ({}, {})", j, nb[q]));
                out.push_back({nb[p], j, nb[q], std::atan2(std::abs(cross(a, b)), dot(a, b))});
            }
        }
    }
    return out;
}

namespace {

std::vector<int> sorted_others(const Layout& layout, int i) {
    const int n = static_cast<int>(layout.size());
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        keyed.emplace_back(norm(layout[static_cast<std::size_t>(i)] - layout[static_cast<std::size_t>(j)]), j);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> order;
    order.reserve(keyed.size());
    for (const auto& kv : keyed) order.push_back(kv.second);
    return order;
}

}  // namespace

NeighborOrder knn_order(const Layout& layout, Exec exec) {
    const int n = static_cast<int>(layout.size());
    NeighborOrder out(static_cast<std::size_t>(n));
    if (exec == Exec::serial) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sorted_others(layout, i);
        return out;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sorted_others(layout, i);
    return out;
}

std::vector<std::pair<double, double>> knn_cutoffs(const Layout& layout, int k) {
    const int n = static_cast<int>(layout.size());
    if (k < 1 || k + 1 > n - 1)
        throw InvalidArgument(fmt::format("k = {} out of range for {} nodes (need 1 <= k <= n-2)", k, n));
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto order = sorted_others(layout, i);
        const Vec2 pi = layout[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = {
            norm(pi - layout[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])]),
            norm(pi - layout[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])])};
    }
    return out;
}

Layout rotate_about_centroid(const Layout& layout, double theta) {
    Vec2 c{};
    for (const auto& p : layout) c += p;
    if (!layout.empty()) c *= 1.0 / static_cast<double>(layout.size());
    const double cs = std::cos(theta), sn = std::sin(theta);
    Layout out;
    out.reserve(layout.size());
    for (const auto& p : layout) {
        const Vec2 d = p - c;
        out.push_back({cs * d.x - sn * d.y, sn * d.x + cs * d.y});
    }
    return out;
}

double soft_max_weighted(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double top = *std::max_element(v.begin(), v.end());
    double z = 0.0, s = 0.0;
    for (double x : v) {
        const double e = std::exp(x - top);
        z += e;
        s += e * x;
    }
    return s / z;
}

BoxSize soft_bounding_box(const Layout& layout, double theta) {
    const Layout r = rotate_about_centroid(layout, theta);
    std::vector<double> xs, ys, nxs, nys;
    xs.reserve(r.size());
    ys.reserve(r.size());
    for (const auto& p : r) {
        xs.push_back(p.x);
        ys.push_back(p.y);
        nxs.push_back(-p.x);
        nys.push_back(-p.y);
    }
    // <softmax(-x), x> = -<softmax(-x), -x>
    return {soft_max_weighted(xs) + soft_max_weighted(nxs), soft_max_weighted(ys) + soft_max_weighted(nys)};
}

BoxSize hard_bounding_box(const Layout& layout, double theta) {
    const Layout r = rotate_about_centroid(layout, theta);
    if (r.empty()) return {};
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& p : r) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    return {x1 - x0, y1 - y0};
}

}  // namespace gdl
