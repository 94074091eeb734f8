#include <benchmark/benchmark.h>

#include "selftune/knn.hpp"
#include "selftune/rng.hpp"

using namespace selftune;

namespace {

Mat cloud(Index n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Mat x(n, d);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) x(i, c) = rng.uniform(-1.0, 1.0);
  return x;
}

void BM_index_build(benchmark::State& state) {
  const Mat x = cloud(state.range(0), 3, 42);
  for (auto _ : state) {
    SpatialIndex index(x);
    benchmark::DoNotOptimize(index);
  }
}

void BM_knn_query(benchmark::State& state) {
  const Mat x = cloud(state.range(0), 3, 42);
  const SpatialIndex index(x);
  for (auto _ : state) {
    const Mat dist = knn_distances(index, x, 16, true);
    benchmark::DoNotOptimize(dist.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_index_build)->Arg(1000)->Arg(8000);
BENCHMARK(BM_knn_query)->Arg(1000)->Arg(8000);

BENCHMARK_MAIN();
