#include <benchmark/benchmark.h>

#include "leastgrad/dirichlet.hpp"
#include "leastgrad/perimeter.hpp"
#include "leastgrad/whitney.hpp"

namespace lg = leastgrad;

namespace {

struct DiskFixture {
    lg::Space space;
    lg::Region region;
    std::vector<bool> E, U;

    explicit DiskFixture(double h) {
        std::tie(space, region) = lg::build_grid(lg::DomainSpec::disk(1.0), h,
                                                 lg::MeasureWeights::two_phase(1.0, 0.5));
        E.assign(space.node_count(), false);
        U.assign(space.node_count(), true);
        for (int v : region.omega) E[v] = true;
    }
};

DiskFixture& disk64() {
    static DiskFixture f(1.0 / 64.0);
    return f;
}

} // namespace

static void BM_BuildGrid(benchmark::State& state) {
    for (auto _ : state) {
        auto [s, r] = lg::build_grid(lg::DomainSpec::disk(1.0), 1.0 / state.range(0),
                                     lg::MeasureWeights::uniform());
        benchmark::DoNotOptimize(s.edge_count());
    }
}
BENCHMARK(BM_BuildGrid)->Arg(32)->Arg(64)->Arg(128);

static void BM_MinCutPerimeter(benchmark::State& state) {
    auto& f = disk64();
    for (auto _ : state) {
        auto est = lg::perimeter_relaxed(f.space, f.E, f.U, 1e-3);
        benchmark::DoNotOptimize(est.value);
    }
}
BENCHMARK(BM_MinCutPerimeter)->Unit(benchmark::kMillisecond);

static void BM_PdhgPerimeter(benchmark::State& state) {
    auto& f = disk64();
    lg::ConvexOptions opts;
    opts.backend = lg::ConvexBackend::FirstOrderConvex;
    for (auto _ : state) {
        auto est = lg::perimeter_relaxed(f.space, f.E, f.U, 1e-3, opts);
        benchmark::DoNotOptimize(est.value);
    }
}
BENCHMARK(BM_PdhgPerimeter)->Unit(benchmark::kMillisecond);

static void BM_ProblemT(benchmark::State& state) {
    auto& f = disk64();
    const auto data = lg::ScalarField::from_function(f.space, [](double x, double) { return x; });
    for (auto _ : state) {
        auto sol = lg::solve_problem_T(f.space, f.region, data);
        benchmark::DoNotOptimize(sol.report.energy);
    }
}
BENCHMARK(BM_ProblemT)->Unit(benchmark::kMillisecond);

static void BM_PSolve(benchmark::State& state) {
    auto& f = disk64();
    const auto data = lg::ScalarField::from_function(f.space, [](double x, double) { return x; });
    lg::SolverConfig cfg;
    cfg.p = 1.0 + state.range(0) / 100.0;
    for (auto _ : state) {
        auto [u, rep] = lg::solve_p_dirichlet(f.space, f.region, data, cfg);
        benchmark::DoNotOptimize(rep.energy);
    }
}
BENCHMARK(BM_PSolve)->Arg(50)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_WhitneyCover(benchmark::State& state) {
    auto& f = disk64();
    std::vector<bool> U(f.space.node_count(), false);
    for (int v : f.region.omega) U[v] = true;
    for (auto _ : state) {
        auto cover = lg::whitney_cover(f.space, U, 0.1);
        benchmark::DoNotOptimize(cover.centers.size());
    }
}
BENCHMARK(BM_WhitneyCover)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
