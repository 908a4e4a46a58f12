#include <benchmark/benchmark.h>

#include "rtinterp/analysis.hpp"
#include "rtinterp/catalog.hpp"
#include "rtinterp/rt.hpp"

using namespace rtinterp;

static void BM_ReferenceBasis(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rt_reference_basis(k, 3));
}
BENCHMARK(BM_ReferenceBasis)->DenseRange(0, 3);

static void BM_InterpolatePoly(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto t = make_f2({0.3, 1.0, 0.01});
  const VectorPoly u = random_vector_poly(3, k + 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(interpolate_field(k, t, u));
}
BENCHMARK(BM_InterpolatePoly)->DenseRange(0, 3);

static void BM_InterpolateTrig(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto t = make_f1({0.25, 0.25, 0.0625});
  const AnalyticField u = catalog_lookup("smooth-trig").field;
  for (auto _ : state) benchmark::DoNotOptimize(interpolate_field(k, t, u));
}
BENCHMARK(BM_InterpolateTrig)->DenseRange(0, 3);

static void BM_StabilityRatioRvp(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto t = make_f1({0.25, 0.25, 0.0625});
  const AnalyticField u = catalog_lookup("smooth-trig").field;
  for (auto _ : state) benchmark::DoNotOptimize(stability_ratio_rvp(t, u, k, 2.0));
}
BENCHMARK(BM_StabilityRatioRvp)->DenseRange(0, 2);

static void BM_ReferenceDecomposition(benchmark::State& state) {
  const Simplex t({Eigen::Vector3d(0.1, 0.2, 0.0), Eigen::Vector3d(1.0, 0.3, 0.1), Eigen::Vector3d(0.4, 0.9, 0.2),
                   Eigen::Vector3d(0.3, 0.4, 0.8)});
  for (auto _ : state) benchmark::DoNotOptimize(reference_decomposition(t));
}
BENCHMARK(BM_ReferenceDecomposition);

BENCHMARK_MAIN();
