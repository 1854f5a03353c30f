#include <benchmark/benchmark.h>

#include <random>

#include "dvl/layouts.hpp"

namespace {

std::vector<double> random_weights(size_t n) {
    std::mt19937 rng(17);
    std::vector<double> w;
    for (size_t i = 0; i < n; ++i) w.push_back(1 + (rng() % 1000) / 10.0);
    return w;
}

void BM_Squarify(benchmark::State& state) {
    auto weights = random_weights(static_cast<size_t>(state.range(0)));
    dvl::Extent extent{0, 0, 1024, 768};
    for (auto _ : state) benchmark::DoNotOptimize(dvl::squarify(weights, extent, false));
}
BENCHMARK(BM_Squarify)->Arg(16)->Arg(128)->Arg(1024);

void BM_Partition(benchmark::State& state) {
    auto weights = random_weights(static_cast<size_t>(state.range(0)));
    dvl::Extent extent{0, 0, 1024, 768};
    for (auto _ : state)
        benchmark::DoNotOptimize(dvl::partition(weights, extent, dvl::Axis::Vertical));
}
BENCHMARK(BM_Partition)->Arg(128)->Arg(4096);

void BM_ForceLayout(benchmark::State& state) {
    size_t n = static_cast<size_t>(state.range(0));
    std::vector<dvl::Value> keys;
    std::vector<std::pair<dvl::Value, dvl::Value>> edges;
    for (size_t i = 0; i < n; ++i) {
        keys.push_back(int64_t(i));
        if (i) edges.push_back({int64_t(i), int64_t(i / 2)});
    }
    dvl::Extent extent{0, 0, 1024, 768};
    for (auto _ : state)
        benchmark::DoNotOptimize(dvl::force_layout(edges, keys, {}, extent, 7, 50));
}
BENCHMARK(BM_ForceLayout)->Arg(16)->Arg(64)->Arg(256);

void BM_TreeLayout(benchmark::State& state) {
    size_t n = static_cast<size_t>(state.range(0));
    std::vector<std::pair<dvl::Value, dvl::Value>> edges;
    for (size_t i = 0; i < n; ++i)
        edges.push_back({int64_t(i), i ? dvl::Value{int64_t(i / 2)} : dvl::Value{}});
    dvl::Extent extent{0, 0, 1024, 768};
    for (auto _ : state) benchmark::DoNotOptimize(dvl::tree_layout(edges, extent));
}
BENCHMARK(BM_TreeLayout)->Arg(64)->Arg(512);

} // namespace

BENCHMARK_MAIN();
