#include "selftune/bandwidth.hpp"

#include <cmath>

#include "selftune/moments.hpp"

namespace selftune {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

// argument beyond which exp(-pi r / 4) < 1e-18; summands past this cutoff are
// below double resolution of the total
constexpr double kKdeArgCutoff = 18.0 * 2.302585092994046 * 4.0 / kPi;

inline double kde_profile(double r) { return std::exp(-0.25 * kPi * r); }

Vec kde_sums(const SpatialIndex& refs, const Mat& queries, double eps_kde) {
  if (!(eps_kde > 0.0))
    throw std::invalid_argument("kde: eps_kde must be positive");
  if (queries.cols() != refs.dim())
    throw std::invalid_argument("kde: dimension mismatch");

  Vec out(queries.rows());
  const double radius = std::sqrt(kKdeArgCutoff * eps_kde);
  std::vector<Index> hits;
  Eigen::RowVectorXd q(queries.cols());
  for (Index i = 0; i < queries.rows(); ++i) {
    q = queries.row(i);
    refs.radius(q.data(), radius, &hits);
    double acc = 0.0;
    for (Index j : hits) {
      double d2 = 0.0;
      for (Index c = 0; c < queries.cols(); ++c) {
        const double diff = q[c] - refs.point(j)[c];
        d2 += diff * diff;
      }
      acc += kde_profile(d2 / eps_kde);
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace

Vec normalize_bandwidth(const Vec& knn_dist, int k, Index n_ref, int d,
                        double m0) {
  if (k < 2) throw std::invalid_argument("normalize_bandwidth: k must be > 1");
  if (n_ref < k)
    throw std::invalid_argument("normalize_bandwidth: n_ref must be >= k");
  if (d < 1) throw std::invalid_argument("normalize_bandwidth: d must be >= 1");
  if (!(m0 > 0.0))
    throw std::invalid_argument("normalize_bandwidth: m0 must be positive");
  // rho_hat = R-hat * ((1/m0) k / n_ref)^(-1/d)
  const double scale =
      std::pow(static_cast<double>(k) / (m0 * static_cast<double>(n_ref)),
               -1.0 / d);
  return knn_dist * scale;
}

BandwidthField bandwidth_field(const SpatialIndex& refs, const Mat& queries,
                               int k, int d, bool exclude_self, double m0) {
  if (k < 2) throw std::invalid_argument("bandwidth_field: k must be > 1");
  if (m0 <= 0.0) m0 = unit_ball_volume(d);

  BandwidthField bw;
  bw.k = k;
  bw.n_ref = refs.size();
  bw.d = d;
  bw.m0 = m0;
  const Mat dist = knn_distances(refs, queries, k, exclude_self);
  bw.knn_dist = dist.col(k - 1);
  bw.rho_hat = normalize_bandwidth(bw.knn_dist, k, bw.n_ref, d, m0);
  return bw;
}

Vec kde_density(const SpatialIndex& refs, const Mat& queries, double eps_kde,
                int d) {
  if (d < 1) throw std::invalid_argument("kde_density: d must be >= 1");
  Vec sums = kde_sums(refs, queries, eps_kde);
  const double norm = std::pow(eps_kde, -0.5 * d) /
                      (kde_m0(d) * static_cast<double>(refs.size()));
  return sums * norm;
}

Vec unnormalized_density(const SpatialIndex& refs, const Mat& queries,
                         double eps_kde) {
  Vec sums = kde_sums(refs, queries, eps_kde);
  return sums / static_cast<double>(refs.size());
}

ErrorProfile relative_error_profile(const Vec& estimate, const Vec& truth) {
  if (estimate.size() != truth.size())
    throw std::invalid_argument("relative_error_profile: length mismatch");
  if (estimate.size() == 0)
    throw std::invalid_argument("relative_error_profile: empty input");

  ErrorProfile out;
  out.rel_err.resize(estimate.size());
  for (Index i = 0; i < estimate.size(); ++i) {
    if (truth[i] == 0.0)
      throw std::invalid_argument("relative_error_profile: zero truth entry");
    out.rel_err[i] = (estimate[i] - truth[i]) / truth[i];
  }
  out.mean_abs = out.rel_err.cwiseAbs().mean();
  out.sup_abs = out.rel_err.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace selftune
