#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fracspde/frac_time.hpp"
#include "fracspde/lp_check.hpp"
#include "fracspde/mittag_leffler.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/solver.hpp"
#include "fracspde/torus.hpp"

using namespace fracspde;

static void BM_MittagLeffler(benchmark::State& state) {
  const MittagLeffler ml(0.5, 0.75);
  const double z = -static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ml(z));
}
BENCHMARK(BM_MittagLeffler)->Arg(0)->Arg(1)->Arg(10)->Arg(100);

static void BM_MittagLefflerTables(benchmark::State& state) {
  for (auto _ : state) {
    const MittagLeffler ml(0.6, 1.3);
    benchmark::DoNotOptimize(ml(-2.0));
  }
}
BENCHMARK(BM_MittagLefflerTables);

static void BM_RLIntegral(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RLIntegrator rl(0.5, n, 1.0 / static_cast<double>(n));
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = std::sin(static_cast<double>(i) / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(rl.apply(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RLIntegral)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

static void BM_FFTRoundTrip(benchmark::State& state) {
  const TorusGrid grid(2, static_cast<std::size_t>(state.range(0)), 2.0 * M_PI);
  const Field f = Field::sample(grid, [](const auto& x) { return std::cos(x[0]) * std::sin(2.0 * x[1]); });
  for (auto _ : state) benchmark::DoNotOptimize(inverse(forward(f)));
}
BENCHMARK(BM_FFTRoundTrip)->Arg(64)->Arg(256);

static void BM_SolveWhite(benchmark::State& state) {
  const TorusGrid grid(1, static_cast<std::size_t>(state.range(0)), 2.0 * M_PI);
  const TimeGrid tg(1.0, static_cast<std::size_t>(state.range(1)));
  const WeightCache cache(FracOrders(0.5, 0.25), tg, grid);
  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const SpaceTimePath h = SpaceTimePath::sample(tg, grid, [](double, const auto&) { return 1.0; });
  const NoisePath noise = sample_noise(7, tg, grid.size());
  for (auto _ : state) benchmark::DoNotOptimize(solve_stochastic_white(cache, basis, h, noise));
}
BENCHMARK(BM_SolveWhite)->Args({64, 128})->Args({64, 512})->Unit(benchmark::kMillisecond);

static void BM_ApplyT(benchmark::State& state) {
  const TorusGrid grid(1, 32, 8.0);
  const TimeGrid tg(1.0, static_cast<std::size_t>(state.range(0)));
  const auto family = adversarial_family(grid, tg, 0.5, 11);
  const LPInstance inst(FracOrders(0.8, 0.6), 2.0, family.at(12));
  for (auto _ : state) benchmark::DoNotOptimize(apply_T(inst, 4));
}
BENCHMARK(BM_ApplyT)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
