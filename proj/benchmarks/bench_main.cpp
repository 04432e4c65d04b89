#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "chaosbsde/brownian.hpp"
#include "chaosbsde/chaos.hpp"
#include "chaosbsde/hermite.hpp"
#include "chaosbsde/multiindex.hpp"
#include "chaosbsde/problems.hpp"
#include "chaosbsde/solver.hpp"

using namespace chaosbsde;

namespace {

std::vector<double> sup_values(const SamplePanel& panel) {
  std::vector<double> f(panel.samples());
  BrownianPath path;
  for (std::size_t m = 0; m < f.size(); ++m) {
    brownian_path(panel, m, path);
    f[m] = terminal_sup_bm(path, false);
  }
  return f;
}

void BM_HermiteFill(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)) + 1);
  double x = 0.3;
  for (auto _ : state) {
    hermite_fill(x, out);
    benchmark::DoNotOptimize(out.data());
    x += 1e-9;
  }
}
BENCHMARK(BM_HermiteFill)->Arg(2)->Arg(3)->Arg(8);

void BM_IndexUniverse(benchmark::State& state) {
  const ChaosBasis b{1.0, 20, static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(IndexUniverse(b).size());
}
BENCHMARK(BM_IndexUniverse)->Args({1, 2})->Args({1, 3})->Args({5, 2})->Unit(benchmark::kMicrosecond);

void BM_SamplePanel(benchmark::State& state) {
  const ChaosBasis b{1.0, 20, 1, 2};
  for (auto _ : state) benchmark::DoNotOptimize(sample_panel(static_cast<std::size_t>(state.range(0)), b, 1, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_SamplePanel)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_EstimateMean(benchmark::State& state) {
  const ChaosBasis b{1.0, 20, 1, static_cast<int>(state.range(1))};
  const IndexUniverse u(b);
  const SamplePanel panel = sample_panel(static_cast<std::size_t>(state.range(0)), b, 2);
  const std::vector<double> f = sup_values(panel);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_coefficients(f, panel, u, {1}));
  state.counters["coefficients"] = static_cast<double>(u.size());
}
BENCHMARK(BM_EstimateMean)->Args({10'000, 2})->Args({10'000, 3})->Unit(benchmark::kMillisecond);

void BM_EstimateSaa(benchmark::State& state) {
  const ChaosBasis b{1.0, 20, 1, 2};
  const IndexUniverse u(b);
  const SamplePanel panel = sample_panel(static_cast<std::size_t>(state.range(0)), b, 3);
  const std::vector<double> f = sup_values(panel);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_coefficients_saa(f, panel, u));
}
BENCHMARK(BM_EstimateSaa)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_GridProjections(benchmark::State& state) {
  const ChaosBasis b{1.0, 20, static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  const IndexUniverse u(b);
  const SamplePanel panel = sample_panel(64, b, 4);
  ChaosCoefficients c{b, 0.5, std::vector<double>(u.size())};
  for (std::size_t r = 0; r < u.size(); ++r) c.coeffs[r] = std::sin(static_cast<double>(r));
  HermiteTable table(b);
  std::vector<double> y(21), z(21 * static_cast<std::size_t>(b.dimension));
  std::size_t m = 0;
  for (auto _ : state) {
    table.assign(panel, m);
    grid_projections(c, u, table, y, z);
    benchmark::DoNotOptimize(y.data());
    m = (m + 1) % panel.samples();
  }
  state.counters["coefficients"] = static_cast<double>(u.size());
}
BENCHMARK(BM_GridProjections)->Args({1, 2})->Args({1, 3})->Args({5, 2})->Unit(benchmark::kMicrosecond);

void BM_PicardStep(benchmark::State& state) {
  SolverConfig cfg;
  cfg.basis = ChaosBasis{1.0, 20, 1, static_cast<int>(state.range(1))};
  cfg.samples = static_cast<std::size_t>(state.range(0));
  cfg.iterations = 1;
  cfg.seed = 5;
  cfg.threads = 1;
  const PicardSolver solver(make_cos_sup().problem, cfg);
  const SolverState start = solver.step(solver.initial_state());
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(start));
}
BENCHMARK(BM_PicardStep)->Args({10'000, 2})->Args({10'000, 3})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
