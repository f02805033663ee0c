// Serial reference kernels against their OpenMP counterparts on grid graphs.

#include <benchmark/benchmark.h>

#include <map>

#include "gdl/graph.hpp"
#include "gdl/kernels.hpp"
#include "gdl/optimizer.hpp"

namespace {

struct Fixture {
    gdl::Graph graph;
    gdl::DistanceMatrix dist;
    gdl::Layout layout;

    explicit Fixture(int side)
        : graph(gdl::generate(gdl::Family::grid, {.w = side, .h = side})),
          dist(gdl::shortest_paths(graph)),
          layout(gdl::random_layout(graph.node_count(), 7)) {}
};

const Fixture& fixture(int side) {
    static std::map<int, Fixture> cache;
    auto it = cache.find(side);
    if (it == cache.end()) it = cache.emplace(side, Fixture(side)).first;
    return it->second;
}

template <auto Kernel>
void stress(benchmark::State& state) {
    const auto& f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.layout, f.dist));
    state.SetComplexityN(static_cast<long>(f.layout.size()));
}

template <auto Kernel>
void vertex_resolution(benchmark::State& state) {
    const auto& f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.layout, 0.1));
    state.SetComplexityN(static_cast<long>(f.layout.size()));
}

template <auto Kernel>
void gabriel(benchmark::State& state) {
    const auto& f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.graph, f.layout));
    state.SetComplexityN(static_cast<long>(f.layout.size()));
}

template <auto Kernel>
void diameter(benchmark::State& state) {
    const auto& f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.layout));
    state.SetComplexityN(static_cast<long>(f.layout.size()));
}

// Grid side lengths, so node counts are 100 .. 6400.
#define GDL_SIDES RangeMultiplier(2)->Range(10, 80)->Complexity()

BENCHMARK(stress<gdl::kernels::stress_serial>)->Name("stress/serial")->GDL_SIDES;
BENCHMARK(stress<gdl::kernels::stress_omp>)->Name("stress/omp")->GDL_SIDES->UseRealTime();
BENCHMARK(vertex_resolution<gdl::kernels::vertex_resolution_serial>)->Name("vertex_resolution/serial")->GDL_SIDES;
BENCHMARK(vertex_resolution<gdl::kernels::vertex_resolution_omp>)->Name("vertex_resolution/omp")->GDL_SIDES->UseRealTime();
BENCHMARK(gabriel<gdl::kernels::gabriel_serial>)->Name("gabriel/serial")->RangeMultiplier(2)->Range(10, 40)->Complexity();
BENCHMARK(gabriel<gdl::kernels::gabriel_omp>)->Name("gabriel/omp")->RangeMultiplier(2)->Range(10, 40)->Complexity()->UseRealTime();
BENCHMARK(diameter<gdl::kernels::diameter_serial>)->Name("diameter/serial")->GDL_SIDES;
BENCHMARK(diameter<gdl::kernels::diameter_omp>)->Name("diameter/omp")->GDL_SIDES->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
