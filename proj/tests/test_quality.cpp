#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "families.hpp"
#include "gdl/criteria.hpp"
#include "gdl/optimizer.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

Layout polygon(int n) {
    Layout x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        x[static_cast<std::size_t>(i)] = {std::cos(t), std::sin(t)};
    }
    return x;
}

}  // namespace

TEST_CASE("quality values stay in range on random layouts") {
    std::mt19937_64 rng(77);
    const auto fams = testfam::all();
    for (int t = 0; t < 200; ++t) {
        const auto& f = fams[static_cast<std::size_t>(t) % fams.size()];
        INFO(f.name, " layout ", t);
        const auto d = shortest_paths(f.graph);
        const auto x = oracle::uniform_layout(f.graph.node_count(), rng);
        const auto q = quality_all(f.graph, d, x);
        for (auto c : {CriterionId::NP, CriterionId::CAM, CriterionId::AR, CriterionId::ANR, CriterionId::VR,
                       CriterionId::GA}) {
            INFO(name(c));
            CHECK(q[c] >= 0.0);
            CHECK(q[c] <= 1.0);
        }
        CHECK(q[CriterionId::CN] >= 0.0);
        CHECK(q[CriterionId::CN] == std::floor(q[CriterionId::CN]));
        CHECK(q[CriterionId::ST] >= 0.0);
        CHECK(q[CriterionId::IL] >= 0.0);
    }
}

TEST_CASE("crossing count equals brute force on every family") {
    std::mt19937_64 rng(5);
    for (const auto& f : testfam::all()) {
        const auto d = shortest_paths(f.graph);
        for (int t = 0; t < 50; ++t) {
            INFO(f.name, " layout ", t);
            const auto x = oracle::uniform_layout(f.graph.node_count(), rng);
            CHECK(quality(CriterionId::CN, f.graph, d, x) ==
                  static_cast<double>(oracle::brute_crossings(f.graph, x).size()));
        }
    }
}

TEST_CASE("grid(5,5) seed 0 crossing count equals brute force") {
    const auto g = generate(Family::grid, {.w = 5, .h = 5});
    const auto x = random_layout(25, 0);
    const auto count = oracle::brute_crossings(g, x).size();
    CHECK(count > 0);
    CHECK(quality(CriterionId::CN, g, shortest_paths(g), x) == static_cast<double>(count));
}

TEST_CASE("regular cycle(10) polygon") {
    const auto g = generate(Family::cycle, {.n = 10});
    const auto d = shortest_paths(g);
    const auto x = polygon(10);
    CHECK(quality(CriterionId::NP, g, d, x, {.k = 2}) == doctest::Approx(1.0));
    CHECK(quality(CriterionId::NP, g, d, x) == doctest::Approx(1.0));
    CHECK(quality(CriterionId::CN, g, d, x) == 0.0);
    CHECK(quality(CriterionId::CAM, g, d, x) == 0.0);
    const double ar = quality(CriterionId::AR, g, d, x);
    CHECK(ar >= 0.9);
    CHECK(ar <= 1.0);
    // Every incident angle is the interior angle 4pi/5 against 2pi/2.
    CHECK(quality(CriterionId::ANR, g, d, x) == doctest::Approx(0.8));
    CHECK(oracle::knn_jaccard(g, x, std::vector<int>(10, 2)) == doctest::Approx(1.0));
}

TEST_CASE("aspect ratio quality of a unit square is one at every rotation") {
    const Layout sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(aspect_ratio_quality(sq) == doctest::Approx(1.0).epsilon(1e-12));
    for (int n : {4, 8, 16}) CHECK(aspect_ratio_quality(sq, n) == doctest::Approx(1.0).epsilon(1e-12));
    // A 2:1 rectangle at rotation zero.
    CHECK(aspect_ratio_quality({{0, 0}, {2, 0}, {2, 1}, {0, 1}}, 1) == doctest::Approx(0.5));
}

TEST_CASE("regular hexagon has zero edge length error") {
    const auto g = generate(Family::cycle, {.n = 6});
    CHECK(quality(CriterionId::IL, g, shortest_paths(g), polygon(6)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coincident nodes give zero vertex resolution without failing") {
    const auto g = generate(Family::path, {.n = 3});
    const auto d = shortest_paths(g);
    const Layout x{{0, 0}, {0, 0}, {1, 0}};
    CHECK(quality(CriterionId::VR, g, d, x) == 0.0);
    CHECK(vertex_resolution_quality({{0, 0}, {1, 0}}, 0.5) == 1.0);
    // Ratio below the cap: min 0.1, max 1, target 0.5.
    CHECK(vertex_resolution_quality({{0, 0}, {0.1, 0}, {1, 0}}, 0.5) == doctest::Approx(0.2));
}

TEST_CASE("crossing angle quality is the worst deviation from a right angle") {
    const Graph g(4, {{0, 1}, {2, 3}});
    CHECK(crossing_angle_quality(g, {{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) == doctest::Approx(0.0).epsilon(1e-12));
    // Crossing at 45 degrees deviates by half of a right angle.
    CHECK(crossing_angle_quality(g, {{-1, 0}, {1, 0}, {-1, -1}, {1, 1}}) == doctest::Approx(0.5));
}

TEST_CASE("gabriel quality excludes edge endpoints and is capped") {
    const Graph g(3, {{0, 1}});
    // Node 2 at distance 0.5 from the midpoint of an edge with radius 1.
    CHECK(gabriel_quality(g, {{-1, 0}, {1, 0}, {0, 0.5}}) == doctest::Approx(0.5));
    CHECK(gabriel_quality(g, {{-1, 0}, {1, 0}, {0, 5}}) == 1.0);
}

TEST_CASE("stress quality matches the oracle") {
    std::mt19937_64 rng(3);
    for (const auto& f : testfam::all()) {
        const auto x = oracle::uniform_layout(f.graph.node_count(), rng);
        CHECK(quality(CriterionId::ST, f.graph, shortest_paths(f.graph), x) ==
              doctest::Approx(oracle::stress(oracle::floyd_warshall(f.graph), x)).epsilon(1e-12));
    }
}

TEST_CASE("neighbourhood quality matches the kNN oracle") {
    std::mt19937_64 rng(4);
    for (const auto& f : testfam::all()) {
        if (f.name == "complete8") continue;
        const auto x = oracle::uniform_layout(f.graph.node_count(), rng);
        std::vector<int> k(static_cast<std::size_t>(f.graph.node_count()));
        for (int i = 0; i < f.graph.node_count(); ++i) k[static_cast<std::size_t>(i)] = f.graph.degree(i);
        INFO(f.name);
        CHECK(neighborhood_jaccard(f.graph, x) == doctest::Approx(oracle::knn_jaccard(f.graph, x, k)).epsilon(1e-12));
    }
}
