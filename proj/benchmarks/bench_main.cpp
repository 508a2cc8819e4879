#include <benchmark/benchmark.h>

#include <random>

#include "ftaplab/convex.hpp"
#include "ftaplab/largemarket.hpp"
#include "ftaplab/linprog.hpp"
#include "ftaplab/market.hpp"
#include "ftaplab/orlicz.hpp"

using namespace ftaplab;

namespace {

FiniteProbSpace bench_space(std::size_t n) {
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  return FiniteProbSpace(p);
}

void BM_LuxemburgNorm(benchmark::State& state) {
  auto space = bench_space(static_cast<std::size_t>(state.range(0)));
  auto F = YoungFunction::exp_minus_linear();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> f(space.size());
  for (auto& v : f) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(luxemburg_norm(f, space, F));
}
BENCHMARK(BM_LuxemburgNorm)->Arg(8)->Arg(64)->Arg(512);

void BM_PolarGauge(benchmark::State& state) {
  auto space = bench_space(static_cast<std::size_t>(state.range(0)));
  auto F = YoungFunction::power(2.0);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> g(space.size());
  for (auto& v : g) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(polar_gauge(g, space, F));
}
BENCHMARK(BM_PolarGauge)->Arg(8)->Arg(64)->Arg(512);

void BM_LpSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.1, 2.0);
  LinearProgram lp;
  lp.objective.resize(static_cast<std::size_t>(n));
  for (auto& c : lp.objective) c = d(rng);
  lp.lower.assign(static_cast<std::size_t>(n), 0.0);
  lp.upper.assign(static_cast<std::size_t>(n), 10.0);
  for (int i = 0; i < n / 2; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (auto& v : row) v = -d(rng);
    lp.add_ineq(std::move(row), -d(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(lp_solve(lp));
}
BENCHMARK(BM_LpSolve)->Arg(8)->Arg(32)->Arg(128);

void BM_FindEmm(benchmark::State& state) {
  auto market = make_binomial_tree(0.4, 1.0, -0.8, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(find_emm(market));
}
BENCHMARK(BM_FindEmm)->Arg(2)->Arg(3)->Arg(4);

void BM_NamflWorstcase(benchmark::State& state) {
  auto market = make_binomial_tree(0.5, 1.0, -1.0, static_cast<int>(state.range(0)));
  auto R = DensityVector::ones(market.leaf_space());
  auto F = YoungFunction::power(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(namfl_worstcase(market, R, 0.25, F));
}
BENCHMARK(BM_NamflWorstcase)->Arg(1)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
