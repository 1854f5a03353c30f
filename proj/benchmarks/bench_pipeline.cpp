#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "dvl/compiler.hpp"
#include "dvl/fixtures.hpp"
#include "dvl/render.hpp"

namespace {

dvl::Database scatter_db(size_t rows) {
    std::mt19937 rng(3);
    std::string csv = "a,b\n";
    for (size_t i = 0; i < rows; ++i)
        csv += std::to_string(rng() % 10000) + "," + std::to_string(rng() % 10000) + "\n";
    dvl::Database db;
    db.add_table(dvl::load_table(csv, "T"));
    return db;
}

void BM_CompileExecuteScatter(benchmark::State& state) {
    dvl::Database db = scatter_db(static_cast<size_t>(state.range(0)));
    dvl::PlotSpec spec = dvl::parse_spec(R"x({
      "views":[{"name":"V","table":"T","mark":"point",
                "encodings":{"x":{"field":"a"},"y":{"field":"b"}}}]})x");
    for (auto _ : state) {
        dvl::TaskGraph graph = dvl::compile(spec, db);
        benchmark::DoNotOptimize(dvl::execute(graph, db));
    }
}
BENCHMARK(BM_CompileExecuteScatter)->Arg(100)->Arg(1000)->Arg(5000);

void BM_GroupBy(benchmark::State& state) {
    std::mt19937 rng(5);
    std::string csv = "k,v\n";
    for (int i = 0; i < state.range(0); ++i)
        csv += std::to_string(rng() % 20) + "," + std::to_string(rng() % 100) + "\n";
    dvl::Database base;
    base.add_table(dvl::load_table(csv, "T"));
    for (auto _ : state) {
        dvl::Database db = base;
        dvl::groupby(db, "T", "G", {"k"}, {{dvl::AggOp::Count, "", "n"}});
        benchmark::DoNotOptimize(db);
    }
}
BENCHMARK(BM_GroupBy)->Arg(1000)->Arg(10000);

void BM_FixtureNodelink(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(dvl::run_fixture("nodelink"));
}
BENCHMARK(BM_FixtureNodelink);

void BM_RenderSvg(benchmark::State& state) {
    dvl::FixtureRun run = dvl::run_fixture("er-diagram");
    dvl::Scene scene = dvl::build_scene(run.result, run.spec);
    for (auto _ : state) benchmark::DoNotOptimize(dvl::render_svg(scene));
}
BENCHMARK(BM_RenderSvg);

} // namespace

