#include "gdl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <fmt/core.h>

#include "gdl/error.hpp"

namespace gdl {

Graph::Graph(int n, const std::vector<Edge>& edges, std::optional<std::vector<double>> ideal_lengths,
             std::vector<std::string> labels)
    : n_(n), adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0),
      nbrs_(static_cast<std::size_t>(n)), ideal_(std::move(ideal_lengths)), labels_(std::move(labels)) {
    if (n < 0) throw InvalidArgument("negative node count");
    edges_.reserve(edges.size());
    for (Edge e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
            throw InvalidArgument(fmt::format("edge ({}, {}) out of range for {} nodes", e.u, e.v, n));
        if (e.u == e.v) throw InvalidArgument(fmt::format("self-loop at node {}", e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
        auto& cell = adj_[static_cast<std::size_t>(e.u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(e.v)];
        if (cell) throw InvalidArgument(fmt::format("duplicate edge ({}, {})", e.u, e.v));
        cell = 1;
        adj_[static_cast<std::size_t>(e.v) * static_cast<std::size_t>(n) + static_cast<std::size_t>(e.u)] = 1;
        nbrs_[static_cast<std::size_t>(e.u)].push_back(e.v);
        nbrs_[static_cast<std::size_t>(e.v)].push_back(e.u);
        edges_.push_back(e);
    }
    for (auto& nb : nbrs_) std::sort(nb.begin(), nb.end());
    if (ideal_) {
        if (ideal_->size() != edges_.size())
            throw InvalidArgument("ideal_lengths must have one entry per edge");
        for (double l : *ideal_) {
            if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("ideal edge lengths must be positive");
        }
    }
    if (labels_.empty()) {
        labels_.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
    } else if (labels_.size() != static_cast<std::size_t>(n)) {
        throw InvalidArgument("label count does not match node count");
    }
}

int Graph::max_degree() const {
    int best = 0;
    for (const auto& nb : nbrs_) best = std::max(best, static_cast<int>(nb.size()));
    return best;
}

double DistanceMatrix::max() const {
    double best = 0.0;
    for (double v : d_) best = std::max(best, v);
    return best;
}

namespace {

std::vector<int> bfs(const Graph& g, int source) {
    std::vector<int> dist(static_cast<std::size_t>(g.node_count()), -1);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : g.neighbors(u)) {
            if (dist[static_cast<std::size_t>(v)] < 0) {
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

}  // namespace

bool is_connected(const Graph& g) {
    if (g.node_count() == 0) return true;
    auto d = bfs(g, 0);
    return std::none_of(d.begin(), d.end(), [](int v) { return v < 0; });
}

DistanceMatrix shortest_paths(const Graph& g) {
    const int n = g.node_count();
    DistanceMatrix out(n);
    for (int s = 0; s < n; ++s) {
        auto d = bfs(g, s);
        for (int t = 0; t < n; ++t) {
            if (d[static_cast<std::size_t>(t)] < 0)
                throw DisconnectedGraph(fmt::format("no path between nodes {} and {}", s, t));
            out(s, t) = d[static_cast<std::size_t>(t)];
        }
    }
    return out;
}

namespace {

void require(bool ok, std::string_view what) {
    if (!ok) throw InvalidArgument(fmt::format("invalid size parameter: {}", what));
}

}  // namespace

Graph generate(Family family, const FamilyParams& p) {
    std::vector<Edge> edges;
    int n = 0;
    switch (family) {
        case Family::cycle:
            require(p.n >= 3, "cycle needs n >= 3");
            n = p.n;
            for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
            break;
        case Family::path:
            require(p.n >= 1, "path needs n >= 1");
            n = p.n;
            for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
            break;
        case Family::grid:
            require(p.w >= 1 && p.h >= 1, "grid needs w, h >= 1");
            n = p.w * p.h;
            for (int y = 0; y < p.h; ++y)
                for (int x = 0; x + 1 < p.w; ++x) edges.push_back({y * p.w + x, y * p.w + x + 1});
            for (int y = 0; y + 1 < p.h; ++y)
                for (int x = 0; x < p.w; ++x) edges.push_back({y * p.w + x, (y + 1) * p.w + x});
            break;
        case Family::balanced_tree: {
            require(p.branch >= 1 && p.depth >= 1, "balanced_tree needs branch, depth >= 1");
            // BFS numbering: children of node v are branch*v+1 .. branch*v+branch.
            int level = 1;
            n = 1;
            for (int d = 0; d < p.depth; ++d) {
                level *= p.branch;
                n += level;
            }
            for (int v = 1; v < n; ++v) edges.push_back({(v - 1) / p.branch, v});
            break;
        }
        case Family::complete:
            require(p.n >= 1, "complete needs n >= 1");
            n = p.n;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
            break;
        case Family::complete_bipartite:
            require(p.a >= 1 && p.b >= 1, "complete_bipartite needs a, b >= 1");
            n = p.a + p.b;
            for (int i = 0; i < p.a; ++i)
                for (int j = 0; j < p.b; ++j) edges.push_back({i, p.a + j});
            break;
        case Family::cube:
            n = 8;
            for (int i = 0; i < 8; ++i)
                for (int bit = 1; bit < 8; bit <<= 1)
                    if ((i & bit) == 0) edges.push_back({i, i | bit});
            break;
        case Family::dodecahedron:
            // Generalized Petersen graph GP(10, 2): outer 10-cycle, spokes, inner star polygon.
            n = 20;
            for (int i = 0; i < 10; ++i) edges.push_back({i, (i + 1) % 10});
            for (int i = 0; i < 10; ++i) edges.push_back({i, 10 + i});
            for (int i = 0; i < 10; ++i) edges.push_back({10 + i, 10 + (i + 2) % 10});
            break;
    }
    return Graph(n, edges);
}

std::optional<Family> family_from_string(std::string_view name) {
    static constexpr std::pair<std::string_view, Family> table[] = {
        {"cycle", Family::cycle},
        {"path", Family::path},
        {"grid", Family::grid},
        {"balanced_tree", Family::balanced_tree},
        {"tree", Family::balanced_tree},
        {"complete", Family::complete},
        {"complete_bipartite", Family::complete_bipartite},
        {"bipartite", Family::complete_bipartite},
        {"cube", Family::cube},
        {"dodecahedron", Family::dodecahedron},
    };
    for (const auto& [key, fam] : table)
        if (key == name) return fam;
    return std::nullopt;
}

std::string_view to_string(Family family) {
    switch (family) {
        case Family::cycle: return "cycle";
        case Family::path: return "path";
        case Family::grid: return "grid";
        case Family::balanced_tree: return "balanced_tree";
        case Family::complete: return "complete";
        case Family::complete_bipartite: return "complete_bipartite";
        case Family::cube: return "cube";
        case Family::dodecahedron: return "dodecahedron";
    }
    return "unknown";
}

std::string family_graph_name(Family family, const FamilyParams& p) {
    switch (family) {
        case Family::cycle: return fmt::format("cycle{}", p.n);
        case Family::path: return fmt::format("path{}", p.n);
        case Family::grid: return fmt::format("grid{}x{}", p.w, p.h);
        case Family::balanced_tree: return fmt::format("tree{}_{}", p.branch, p.depth);
        case Family::complete: return fmt::format("complete{}", p.n);
        case Family::complete_bipartite: return fmt::format("bipartite{}_{}", p.a, p.b);
        case Family::cube: return "cube";
        case Family::dodecahedron: return "dodecahedron";
    }
    return "graph";
}

}  // namespace gdl
