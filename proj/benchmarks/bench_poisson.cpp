#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "gdgs/poisson.hpp"

namespace {

gdgs::PoissonProblem make_problem(int n, int channels) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> phase(0.0, 6.28318);
  gdgs::FieldImage u(n, n, channels);
  for (int c = 0; c < channels; ++c) {
    const double p0 = phase(rng), p1 = phase(rng);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        u.at(y, x, c) = std::sin(6.0 * x / n + p0) * std::cos(4.0 * y / n + p1) + 0.1 * std::sin(40.0 * x * y / (n * n));
  }
  gdgs::PoissonProblem problem;
  problem.rhs = gdgs::discrete_laplacian(u);
  return problem;
}

void BM_Spectral(benchmark::State& state) {
  const auto problem = make_problem(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::solve_spectral(problem));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_Spectral)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Multigrid(benchmark::State& state) {
  const auto problem = make_problem(static_cast<int>(state.range(0)), 1);
  gdgs::MultigridOptions opts;
  gdgs::SolveReport report;
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::solve_multigrid(problem, opts, &report));
  state.counters["cycles"] = report.cycles;
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_Multigrid)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_DiscreteLaplacian(benchmark::State& state) {
  const auto problem = make_problem(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::discrete_laplacian(problem.rhs));
}
BENCHMARK(BM_DiscreteLaplacian)->Arg(256)->Arg(512);

}  // namespace
