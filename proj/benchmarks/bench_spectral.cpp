#include <benchmark/benchmark.h>

#include "selftune/bandwidth.hpp"
#include "selftune/kernels.hpp"
#include "selftune/knn.hpp"
#include "selftune/manifold.hpp"
#include "selftune/spectral.hpp"

using namespace selftune;

namespace {

AffinityMatrix circle_affinity(Index n) {
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("sine_well"));
  const PointCloud cloud = ds.sample(n, 42);
  const SpatialIndex index(cloud.coords);
  const BandwidthField bw = bandwidth_field(index, cloud.coords, 21, 1, true);
  KernelSpec spec;
  spec.variant = KernelVariant::selftuned_alpha;
  spec.eps = 1e-3;
  return build_selftuned(cloud.coords, bw, spec);
}

void BM_eig_unnormalized(benchmark::State& state) {
  const AffinityMatrix w = circle_affinity(state.range(0));
  for (auto _ : state) {
    const SpectralResult res = eig_unnormalized(w, 6);
    benchmark::DoNotOptimize(res.eigenvalues.data());
  }
}

}  // namespace

BENCHMARK(BM_eig_unnormalized)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
