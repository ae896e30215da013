#include <benchmark/benchmark.h>

#include "nlasso/link.hpp"
#include "nlasso/predict.hpp"
#include "nlasso/quantize.hpp"
#include "nlasso/regularizer.hpp"
#include "nlasso/solver.hpp"

using namespace nlasso;

static void BM_LinkMoments(benchmark::State& state) {
  const auto link = parse_link("noisy_sign:0.3");
  for (auto _ : state) benchmark::DoNotOptimize(compute_moments(link));
}
BENCHMARK(BM_LinkMoments);

static void BM_LinkMomentsQuadrature(benchmark::State& state) {
  const auto link = parse_link("relu");
  for (auto _ : state) benchmark::DoNotOptimize(quadrature_moments(link));
}
BENCHMARK(BM_LinkMomentsQuadrature);

static void BM_FunctionL1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(f_function(L1Norm{}, SparseGauss{0.15}, 0.8, 1.3, 0.0));
}
BENCHMARK(BM_FunctionL1);

static void BM_FunctionGroup(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(f_function(GroupL12Norm{3}, GroupSparseGauss{0.05, 3}, 0.8, 1.3, 0.0));
}
BENCHMARK(BM_FunctionGroup);

static void BM_SolveMaxMin(benchmark::State& state) {
  const auto m = compute_moments(parse_link("noisy_sign:0.3"));
  for (auto _ : state) benchmark::DoNotOptimize(solve_maxmin(L1Norm{}, SparseGauss{0.15}, 1.2, 1.0, m));
}
BENCHMARK(BM_SolveMaxMin)->Unit(benchmark::kMillisecond);

static void BM_SparseFixedPoint(benchmark::State& state) {
  const auto m = compute_moments(parse_link("noisy_sign:0.3"));
  for (auto _ : state) benchmark::DoNotOptimize(sparse_fixed_point(SparseGauss{0.15}, 0.75, 1.0, m));
}
BENCHMARK(BM_SparseFixedPoint)->Unit(benchmark::kMicrosecond);

static void BM_SolveLasso(benchmark::State& state) {
  Rng rng(1);
  const auto p = generate_problem(SparseGauss{0.15}, parse_link("noisy_sign:0.3"), L1Norm{}, state.range(0), 1.2,
                                  1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lasso(p));
}
BENCHMARK(BM_SolveLasso)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_LloydMax(benchmark::State& state) {
  const int bits = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lloyd_max(bits));
}
BENCHMARK(BM_LloydMax)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
