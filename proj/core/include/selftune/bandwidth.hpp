#pragma once

#include "selftune/knn.hpp"
#include "selftune/types.hpp"

namespace selftune {

// Per-point kNN bandwidths. knn_dist holds R-hat, the distance to the k-th
// nearest reference; rho_hat the density-normalized version
//   rho_hat = R-hat * (k / (m0 n_ref))^(-1/d)
// which converges to bar-rho = p^(-1/d) as the reference set grows.
struct BandwidthField {
  Vec knn_dist;
  Vec rho_hat;
  int k = 0;
  Index n_ref = 0;
  int d = 1;
  double m0 = 2.0;  // ball-volume constant of the counting profile
};

Vec normalize_bandwidth(const Vec& knn_dist, int k, Index n_ref, int d,
                        double m0);

// Full pipeline: k-th neighbor distances plus normalization. m0 <= 0 selects
// the unit-ball volume for dimension d. With exclude_self the queries must be
// the reference rows themselves.
BandwidthField bandwidth_field(const SpatialIndex& refs, const Mat& queries,
                               int k, int d, bool exclude_self,
                               double m0 = 0.0);

// Kernel density estimate with the fixed profile h(r) = exp(-pi r / 4)
// (bandwidth-4/pi Gaussian, so that m0[h] = 2^d):
//   p-hat(x) = eps^(-d/2) / (2^d N) * sum_j h(||x - y_j||^2 / eps)
Vec kde_density(const SpatialIndex& refs, const Mat& queries, double eps_kde,
                int d);

// Un-normalized density used when the intrinsic dimension is unknown:
//   mu-hat(x) = (1/N) sum_j h(||x - y_j||^2 / eps)
Vec unnormalized_density(const SpatialIndex& refs, const Mat& queries,
                         double eps_kde);

// Signed relative errors (estimate - truth) / truth plus summary statistics.
struct ErrorProfile {
  Vec rel_err;
  double mean_abs = 0.0;
  double sup_abs = 0.0;
};

ErrorProfile relative_error_profile(const Vec& estimate, const Vec& truth);

}  // namespace selftune
