#include <benchmark/benchmark.h>

#include "selftune/bandwidth.hpp"
#include "selftune/kernels.hpp"
#include "selftune/knn.hpp"
#include "selftune/laplacian.hpp"
#include "selftune/manifold.hpp"

using namespace selftune;

namespace {

struct Setup {
  Mat x;
  BandwidthField bw;
};

Setup setup(Index n) {
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("sine_well"));
  const PointCloud cloud = ds.sample(n, 42);
  Setup s;
  s.x = cloud.coords;
  const SpatialIndex index(s.x);
  s.bw = bandwidth_field(index, s.x, 21, 1, true);
  return s;
}

void BM_assemble_selftuned(benchmark::State& state) {
  const Setup s = setup(state.range(0));
  KernelSpec spec;
  spec.variant = KernelVariant::selftuned_alpha;
  spec.eps = 1e-3;
  for (auto _ : state) {
    const AffinityMatrix w = build_selftuned(s.x, s.bw, spec);
    benchmark::DoNotOptimize(w.val.data());
  }
}

void BM_dirichlet_form(benchmark::State& state) {
  const Setup s = setup(state.range(0));
  KernelSpec spec;
  spec.variant = KernelVariant::selftuned_alpha;
  spec.eps = 1e-3;
  const AffinityMatrix w = build_selftuned(s.x, s.bw, spec);
  const OperatorConfig cfg = operator_config(*spec.eps, spec.alpha, 1);
  Vec f(w.n);
  for (Index i = 0; i < w.n; ++i) f[i] = std::sin(6.28318530717958648 * i / w.n);
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_form(w, f, cfg));
}

}  // namespace

BENCHMARK(BM_assemble_selftuned)->Arg(1000)->Arg(4000);
BENCHMARK(BM_dirichlet_form)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
