#include <benchmark/benchmark.h>

#include <cmath>

#include "gbsde/gsim.hpp"
#include "gbsde/lattice.hpp"
#include "gbsde/pde_solver.hpp"
#include "support.hpp"

using namespace gbsde;

static void BM_ExprEval(benchmark::State& state) {
    const Expr e = parse("0.3*z^2 - 0.2*y + max(1 - x, 0)*exp(-t)");
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e.eval(Env::txyz(0.5, x, 0.1, 0.2)));
        x += 1e-9;
    }
}
BENCHMARK(BM_ExprEval);

static void BM_SolveTerminal(benchmark::State& state) {
    const Problem p = testing::problem_file("gheat.json");
    GridSpec spec;
    spec.nx = static_cast<std::size_t>(state.range(0)) - 1;
    spec.nt = static_cast<std::size_t>(state.range(0));
    const Grid g(p, spec);
    for (auto _ : state) benchmark::DoNotOptimize(solve_terminal(p, g).values().data());
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.nodes() * g.nt()));
}
BENCHMARK(BM_SolveTerminal)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ObstacleProjection(benchmark::State& state) {
    const Problem p = testing::problem_file("call_obstacle.json");
    GridSpec spec;
    spec.nx = 199;
    spec.nt = 1200;
    const Grid g(p, spec);
    for (auto _ : state) benchmark::DoNotOptimize(solve_obstacle_projection(p, g).values().data());
}
BENCHMARK(BM_ObstacleProjection)->Unit(benchmark::kMillisecond);

static void BM_LatticePenalized(benchmark::State& state) {
    const Problem p = testing::problem_file("call_obstacle.json");
    const auto nt = static_cast<std::size_t>(state.range(0));
    const Lattice lat = build_lattice_dx(p, nt, 0.04 * std::sqrt(1200.0 / static_cast<double>(nt)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_penalized(lat, p, 0.5 / lat.dt()).root_y());
    state.SetItemsProcessed(state.iterations() * static_cast<long>(lat.node_count()));
}
BENCHMARK(BM_LatticePenalized)->Arg(300)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

static void BM_SamplePaths(benchmark::State& state) {
    const Problem p = testing::problem_file("gheat.json");
    const Scenario s = Scenario::constant(1.0, 1.0);
    const auto paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sample_paths(p, s, paths, 100, 1).x.data());
    state.SetItemsProcessed(state.iterations() * static_cast<long>(paths * 100));
}
BENCHMARK(BM_SamplePaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
