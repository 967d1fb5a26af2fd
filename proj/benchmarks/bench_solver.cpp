#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "degchemo/analysis.hpp"
#include "degchemo/config.hpp"
#include "degchemo/norms.hpp"
#include "degchemo/solver.hpp"

using namespace degchemo;

namespace {

State bump_state(int dim, int n) {
    const Grid g = dim == 1 ? make_grid_1d(1.0, n) : make_grid_2d(1.0, 1.0, n, n);
    InitialSpec m;
    return make_state(make_initial(m, g, 0.0, 1), ScalarField(g, 1.0, 1.0));
}

void BM_Step(benchmark::State& st) {
    const State s = bump_state(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    const ModelParams p = default_params();
    SolverConfig c;
    c.implicit_diffusion = st.range(2) != 0;
    const double dt = stable_dt(s, p, c);
    for (auto _ : st) benchmark::DoNotOptimize(step(s, p, c, dt));
    st.SetItemsProcessed(st.iterations() * static_cast<long>(s.M.size()));
}
BENCHMARK(BM_Step)->Args({1, 256, 0})->Args({1, 256, 1})->Args({2, 64, 0})->Args({2, 64, 1});

void BM_StableDt(benchmark::State& st) {
    const State s = bump_state(1, static_cast<int>(st.range(0)));
    const ModelParams p = default_params();
    const SolverConfig c;
    for (auto _ : st) benchmark::DoNotOptimize(stable_dt(s, p, c));
}
BENCHMARK(BM_StableDt)->Arg(256)->Arg(512);

void BM_HMinus1(benchmark::State& st) {
    const int dim = static_cast<int>(st.range(0));
    const int n = static_cast<int>(st.range(1));
    const Grid g = dim == 1 ? make_grid_1d(1.0, n) : make_grid_2d(1.0, 1.0, n, n);
    const NormWorkspace ws(g);
    const ScalarField w = sample(g, [](double x, double y) { return std::sin(3.0 * x) * std::cos(2.0 * y); });
    for (auto _ : st) benchmark::DoNotOptimize(hminus1_norm(ws, w));
}
BENCHMARK(BM_HMinus1)->Args({1, 512})->Args({2, 64})->Args({2, 128});

void BM_BoxCounting(benchmark::State& st) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(st.range(0)));
    for (auto& p : pts) {
        p.resize(32);
        for (double& x : p) x = u(rng);
    }
    const std::vector<double> radii{0.05, 0.1, 0.2, 0.4, 0.8};
    for (auto _ : st) benchmark::DoNotOptimize(box_counting_dimension(pts, radii));
}
BENCHMARK(BM_BoxCounting)->Arg(200)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
