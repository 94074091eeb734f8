#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "selftune/bandwidth.hpp"
#include "selftune/experiments.hpp"
#include "selftune/manifold.hpp"
#include "selftune/moments.hpp"
#include "test_support.hpp"

using namespace selftune;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("moment constants of the gaussian profile") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(unit_ball_volume(3) ==
        doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  CHECK(gaussian_m0(1) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
  CHECK(gaussian_m2(1) ==
        doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-14));
  CHECK(gaussian_m0(2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(gaussian_m2(2) == doctest::Approx(kPi / 2.0).epsilon(1e-14));
  CHECK(kde_m0(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(kde_m0(3) == doctest::Approx(8.0).epsilon(1e-14));

  // quadrature route must agree with the closed forms to 1e-10
  auto gaussian = [](double r) { return std::exp(-r); };
  for (int d = 1; d <= 4; ++d) {
    CHECK(kernel_m0(gaussian, d) ==
          doctest::Approx(gaussian_m0(d)).epsilon(1e-10));
    CHECK(kernel_m2(gaussian, d) ==
          doctest::Approx(gaussian_m2(d)).epsilon(1e-10));
  }
  auto kde_profile = [](double r) { return std::exp(-kPi * r / 4.0); };
  for (int d = 1; d <= 3; ++d)
    CHECK(kernel_m0(kde_profile, d) ==
          doctest::Approx(kde_m0(d)).epsilon(1e-10));
}

TEST_CASE("bandwidth normalization arithmetic") {
  Vec r(1);
  r << 1.0;
  // R = 1, k = 2, N = 3, d = 1: rho = ((1/2)(2/3))^(-1) = 3
  CHECK(normalize_bandwidth(r, 2, 3, 1, 2.0)[0] ==
        doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS(normalize_bandwidth(r, 1, 3, 1, 2.0));   // k > 1 required
  CHECK_THROWS(normalize_bandwidth(r, 4, 3, 1, 2.0));   // n_ref < k
  CHECK_THROWS(normalize_bandwidth(r, 2, 3, 0, 2.0));   // bad dimension
  CHECK_THROWS(normalize_bandwidth(r, 2, 3, 1, -1.0));  // bad moment
}

TEST_CASE("bandwidth field on the line") {
  Mat refs(3, 1);
  refs << 0.0, 1.0, 3.0;
  Mat query(1, 1);
  query << 0.0;
  const BandwidthField bw = bandwidth_field(SpatialIndex(refs), query, 2, 1,
                                            false);
  CHECK(bw.knn_dist[0] == 1.0);  // 2nd order statistic of {0, 1, 3}
  CHECK(bw.m0 == doctest::Approx(2.0));
  CHECK(bw.rho_hat[0] ==
        doctest::Approx(1.0 * std::pow(2.0 / (2.0 * 3.0), -1.0))
            .epsilon(1e-12));

  CHECK_THROWS(bandwidth_field(SpatialIndex(refs), query, 1, 1, false));
}

TEST_CASE("rho_hat satisfies its defining identity on random data") {
  selftune::Rng rng(31);
  const Mat refs = testsup::random_cloud(400, 2, rng);
  const Mat queries = testsup::random_cloud(50, 2, rng);
  const int k = 6, d = 2;
  const BandwidthField bw =
      bandwidth_field(SpatialIndex(refs), queries, k, d, false);
  const double scale =
      std::pow(static_cast<double>(k) / (unit_ball_volume(d) * 400.0),
               -1.0 / d);
  for (Index i = 0; i < 50; ++i) {
    CHECK(bw.knn_dist[i] > 0.0);
    CHECK(bw.rho_hat[i] ==
          doctest::Approx(bw.knn_dist[i] * scale).epsilon(1e-12));
  }
}

TEST_CASE("knn distances are 1-Lipschitz in the query") {
  selftune::Rng rng(57);
  const Mat refs = testsup::random_cloud(100, 2, rng);
  const SpatialIndex index(refs);
  for (int rep = 0; rep < 100; ++rep) {
    Mat pair = testsup::random_cloud(2, 2, rng, 1.3);
    const Mat dist = knn_distances(index, pair, 3, false);
    const double gap = (pair.row(0) - pair.row(1)).norm();
    CHECK(std::abs(dist(0, 2) - dist(1, 2)) <= gap + 1e-12);
  }
}

TEST_CASE("kde closed-form values") {
  // single reference at the query, d = 1, eps = 1: p = 1/2
  Mat ref(1, 1);
  ref << 0.0;
  CHECK(kde_density(SpatialIndex(ref), ref, 1.0, 1)[0] ==
        doctest::Approx(0.5).epsilon(1e-14));

  // three collinear points: the middle sees (e^{-pi/4} + 1 + e^{-pi/4})/3
  Mat line(3, 1);
  line << 0.0, 1.0, 2.0;
  const Vec mu = unnormalized_density(SpatialIndex(line), line, 1.0);
  CHECK(mu[1] ==
        doctest::Approx((std::exp(-kPi / 4.0) * 2.0 + 1.0) / 3.0)
            .epsilon(1e-14));
  // far in the tails only the self term survives
  Mat sparse(2, 1);
  sparse << 0.0, 1e6;
  const Vec far = unnormalized_density(SpatialIndex(sparse), sparse, 1.0);
  CHECK(far[0] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS(kde_density(SpatialIndex(ref), ref, 0.0, 1));
  CHECK_THROWS(kde_density(SpatialIndex(ref), ref, 1.0, 0));
}

TEST_CASE("kde is accurate on the uniform circle") {
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("uniform"));
  const PointCloud y = ds.sample(100000, 19);
  const SpatialIndex index(y.coords);
  Mat queries(40, 2);
  Vec truth(40);
  for (int i = 0; i < 40; ++i) {
    queries.row(i) = ds.embed((i + 0.5) / 40.0);
    truth[i] = 1.0;
  }
  const Vec p_hat = kde_density(index, queries, 1e-3, 1);
  const ErrorProfile prof = relative_error_profile(p_hat, truth);
  CHECK(prof.mean_abs < 0.05);
}

TEST_CASE("kde bias scales linearly in the bandwidth") {
  // deterministic grid references make the only error the O(eps) bias
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("uniform"));
  const Index n = 4000;
  Mat refs(n, 2);
  for (Index j = 0; j < n; ++j)
    refs.row(j) = ds.embed(static_cast<double>(j) / n);
  const SpatialIndex index(refs);
  Mat queries(50, 2);
  for (int i = 0; i < 50; ++i) queries.row(i) = ds.embed((i + 0.5) / 50.0);

  const std::vector<double> eps_grid{2e-4, 5e-4, 1.25e-3};
  std::vector<double> bias;
  for (double eps : eps_grid) {
    const Vec p_hat = kde_density(index, queries, eps, 1);
    bias.push_back(std::abs(p_hat.mean() - 1.0));
  }
  const SlopeFit fit = loglog_slope(eps_grid, bias);
  CHECK(fit.slope > 0.7);
  CHECK(fit.slope < 1.3);
}

TEST_CASE("relative error profiles") {
  Vec truth(3), est(3);
  truth << 1.0, -2.0, 4.0;
  est = truth;
  const ErrorProfile zero = relative_error_profile(est, truth);
  CHECK(zero.mean_abs == 0.0);
  CHECK(zero.sup_abs == 0.0);

  const ErrorProfile scaled = relative_error_profile((1.1 * truth).eval(),
                                                     truth);
  for (Index i = 0; i < 3; ++i)
    CHECK(scaled.rel_err[i] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(scaled.sup_abs == doctest::Approx(0.1).epsilon(1e-12));

  Vec bad(3);
  bad << 1.0, 0.0, 2.0;
  CHECK_THROWS(relative_error_profile(est, bad));
  Vec short_vec(2);
  short_vec << 1.0, 2.0;
  CHECK_THROWS(relative_error_profile(short_vec, truth));
}
