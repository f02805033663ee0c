#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "gdl/error.hpp"
#include "gdl/graph.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

Graph make(Family f, FamilyParams p = {}) { return generate(f, p); }

std::set<std::pair<int, int>> edge_set(const std::vector<Edge>& edges) {
    std::set<std::pair<int, int>> s;
    for (const auto& e : edges) s.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
    return s;
}

// Backtracking search for an adjacency-preserving bijection.
bool isomorphic(const Graph& a, const Graph& b) {
    const int n = a.node_count();
    if (n != b.node_count() || a.edge_count() != b.edge_count()) return false;
    std::vector<int> map(n, -1);
    std::vector<bool> used(n, false);
    std::function<bool(int)> extend = [&](int v) {
        if (v == n) return true;
        for (int w = 0; w < n; ++w) {
            if (used[w] || a.degree(v) != b.degree(w)) continue;
            bool ok = true;
            for (int u = 0; u < v && ok; ++u) ok = a.adjacent(u, v) == b.adjacent(map[u], w);
            if (!ok) continue;
            map[v] = w;
            used[w] = true;
            if (extend(v + 1)) return true;
            used[w] = false;
        }
        map[v] = -1;
        return false;
    };
    return extend(0);
}

const std::vector<std::pair<Family, FamilyParams>> kFamilies = {
    {Family::cycle, {.n = 10}},
    {Family::path, {.n = 7}},
    {Family::grid, {.w = 5, .h = 5}},
    {Family::grid, {.w = 4, .h = 5}},
    {Family::balanced_tree, {.branch = 2, .depth = 4}},
    {Family::balanced_tree, {.branch = 3, .depth = 2}},
    {Family::complete, {.n = 6}},
    {Family::complete_bipartite, {.a = 3, .b = 4}},
    {Family::cube, {}},
    {Family::dodecahedron, {}},
};

}  // namespace

TEST_CASE("cycle(10) has 10 nodes, 10 edges and every degree 2") {
    const auto g = make(Family::cycle, {.n = 10});
    CHECK(g.node_count() == 10);
    CHECK(g.edge_count() == 10);
    for (int i = 0; i < 10; ++i) CHECK(g.degree(i) == 2);
}

TEST_CASE("complete(5) has 10 edges") { CHECK(make(Family::complete, {.n = 5}).edge_count() == 10); }

TEST_CASE("dodecahedron is the 3-regular graph on 20 nodes and matches the hand-built edge list") {
    const auto g = make(Family::dodecahedron);
    CHECK(g.node_count() == 20);
    CHECK(g.edge_count() == 30);
    for (int i = 0; i < 20; ++i) CHECK(g.degree(i) == 3);
    const Graph hand(20, oracle::dodecahedron_edges());
    CHECK(isomorphic(g, hand));
    // Sanity of the isomorphism check itself: GP(10,3) is not the dodecahedron.
    std::vector<Edge> desargues;
    for (int i = 0; i < 10; ++i) {
        desargues.push_back({i, (i + 1) % 10});
        desargues.push_back({i, 10 + i});
        desargues.push_back({10 + i, 10 + (i + 3) % 10});
    }
    CHECK_FALSE(isomorphic(Graph(20, desargues), hand));
}

TEST_CASE("grid, tree, bipartite and cube sizes") {
    CHECK(make(Family::grid, {.w = 4, .h = 5}).edge_count() == 31);
    const auto tree = make(Family::balanced_tree, {.branch = 2, .depth = 4});
    CHECK(tree.node_count() == 31);
    CHECK(tree.edge_count() == 30);
    CHECK(make(Family::complete_bipartite, {.a = 3, .b = 4}).edge_count() == 12);
    const auto cube = make(Family::cube);
    CHECK(cube.node_count() == 8);
    CHECK(cube.edge_count() == 12);
}

TEST_CASE("shortest paths on small cases") {
    CHECK(shortest_paths(make(Family::path, {.n = 3}))(0, 2) == 2.0);
    CHECK(shortest_paths(make(Family::cycle, {.n = 10})).max() == 5.0);
}

TEST_CASE("grid(4,5) distances equal Floyd-Warshall") {
    const auto g = make(Family::grid, {.w = 4, .h = 5});
    const auto d = shortest_paths(g);
    const auto fw = oracle::floyd_warshall(g);
    for (int i = 0; i < g.node_count(); ++i)
        for (int j = 0; j < g.node_count(); ++j) CHECK(d(i, j) == fw[i][j]);
}

TEST_CASE("distance matrix invariants hold for every family") {
    for (const auto& [fam, params] : kFamilies) {
        const auto g = generate(fam, params);
        const auto d = shortest_paths(g);
        const auto fw = oracle::floyd_warshall(g);
        const int n = g.node_count();
        REQUIRE(d.size() == n);
        for (int i = 0; i < n; ++i) {
            CHECK(d(i, i) == 0.0);
            for (int j = 0; j < n; ++j) {
                CHECK(d(i, j) == d(j, i));
                CHECK(d(i, j) == fw[i][j]);
                if (i != j) CHECK(d(i, j) >= 1.0);
                if (g.adjacent(i, j)) CHECK(d(i, j) == 1.0);
            }
        }
    }
}

TEST_CASE("generate is deterministic and names are stable") {
    for (const auto& [fam, params] : kFamilies) {
        const auto a = generate(fam, params);
        const auto b = generate(fam, params);
        CHECK(a == b);
        CHECK(edge_set(a.edges()) == edge_set(b.edges()));
    }
    CHECK(family_graph_name(Family::grid, {.w = 5, .h = 5}) == "grid5x5");
    CHECK(family_graph_name(Family::balanced_tree, {.branch = 2, .depth = 4}) == "tree2_4");
    CHECK(family_from_string("tree") == Family::balanced_tree);
    CHECK_FALSE(family_from_string("hexagon").has_value());
}

TEST_CASE("edges are stored with u < v and adjacency is symmetric") {
    const auto g = make(Family::cycle, {.n = 5});
    for (const auto& e : g.edges()) CHECK(e.u < e.v);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(g.adjacent(i, j) == g.adjacent(j, i));
}

TEST_CASE("invalid graphs are rejected") {
    CHECK_THROWS_AS(Graph(3, {{0, 0}}), InvalidArgument);
    CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), InvalidArgument);
    CHECK_THROWS_AS(Graph(3, {{0, 3}}), InvalidArgument);
    CHECK_THROWS_AS(Graph(2, {{0, 1}}, std::vector<double>{1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(Graph(2, {{0, 1}}, std::vector<double>{0.0}), InvalidArgument);
    CHECK_THROWS_AS(generate(Family::cycle, {.n = 2}), InvalidArgument);
    CHECK_THROWS_AS(generate(Family::grid, {.w = 0, .h = 3}), InvalidArgument);
}

TEST_CASE("disconnected input is a hard error") {
    const Graph g(4, {{0, 1}, {2, 3}});
    CHECK_FALSE(is_connected(g));
    CHECK_THROWS_AS(shortest_paths(g), DisconnectedGraph);
    CHECK(is_connected(make(Family::cube)));
}
