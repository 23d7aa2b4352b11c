#include <benchmark/benchmark.h>

#include "psindy/dynamics.hpp"
#include "psindy/features.hpp"
#include "psindy/pde.hpp"
#include "psindy/regression.hpp"
#include "psindy/rng.hpp"

using namespace psindy;

namespace {

Matrix random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Xorshift64Star rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_LibraryEvaluate(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const FeatureLibrary lib = build_library(d, 5);
  const Matrix x = random_matrix(1, 2000, static_cast<Eigen::Index>(d));
  for (auto _ : state) benchmark::DoNotOptimize(lib.evaluate(x));
  state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_LibraryEvaluate)->Arg(1)->Arg(2)->Arg(3);

void BM_Stlsq(benchmark::State& state) {
  const FeatureLibrary lib = build_library(2, 5);
  const Matrix x1 = random_matrix(2, state.range(0), 2);
  const Matrix x2 = random_matrix(3, state.range(0), 2);
  const Matrix theta = lib.evaluate(x1);
  for (auto _ : state) benchmark::DoNotOptimize(stlsq(theta, x2, StlsqConfig{0.05, 25, 0.0}));
}
BENCHMARK(BM_Stlsq)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_Rk4Rossler(benchmark::State& state) {
  const OdeSystem sys = builtin_system("rossler", {{"c", 6.0}});
  Vector x0(3);
  x0 << 0.5, 0.5, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, x0, 0.0, 100.0, 0.01));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Rk4Rossler)->Unit(benchmark::kMillisecond);

void BM_SnapshotSvd(benchmark::State& state) {
  SnapshotMatrix s;
  s.columns = random_matrix(4, 4096, state.range(0));
  for (Eigen::Index k = 0; k < s.columns.cols(); ++k) s.times.push_back(static_cast<double>(k));
  for (auto _ : state) benchmark::DoNotOptimize(snapshot_svd(s, 10));
}
BENCHMARK(BM_SnapshotSvd)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_LambdaOmegaStep(benchmark::State& state) {
  const Field2D init = spiral_seed(64, 64, 10.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_omega_simulate({}, init, 1.0, 0.05, 20));
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_LambdaOmegaStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
