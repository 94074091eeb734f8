#include "selftune/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selftune {

namespace {

inline double sq_dist_rows(const Mat& pts, Index i, Index j) {
  double acc = 0.0;
  for (Index c = 0; c < pts.cols(); ++c) {
    const double diff = pts(i, c) - pts(j, c);
    acc += diff * diff;
  }
  return acc;
}

struct Coo {
  Index i, j;
  double w;
};

// shared assembly: w_ij = exp(-||xi-xj||^2 / (c s_i s_j)) nrm_i nrm_j,
// pairs prefiltered by a radius bound, then thresholded against the max entry
AffinityMatrix assemble(const Mat& points, double c, const Vec& s,
                        const Vec& nrm, const KernelSpec& spec) {
  const Index n = points.rows();
  if (n < 1) throw std::invalid_argument("kernel: empty point set");
  if (!(c > 0.0)) throw std::invalid_argument("kernel: bandwidth must be > 0");
  if (s.size() != n || nrm.size() != n)
    throw std::invalid_argument("kernel: bandwidth field size mismatch");
  for (Index i = 0; i < n; ++i)
    if (!(s[i] > 0.0) || !(nrm[i] > 0.0))
      throw std::invalid_argument(
          "kernel: bandwidths and normalizations must be positive");
  const double tol = spec.truncation_tol;
  if (!(tol >= 0.0) || tol >= 1.0)
    throw std::invalid_argument("kernel: truncation_tol must be in [0, 1)");

  std::vector<Coo> coo;
  double wmax = 0.0;
  if (tol == 0.0) {
    coo.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        const double q = sq_dist_rows(points, i, j) / (c * s[i] * s[j]);
        const double w = std::exp(-q) * nrm[i] * nrm[j];
        wmax = std::max(wmax, w);
        coo.push_back({i, j, w});
      }
  } else {
    const double q_max = std::log(1.0 / tol);
    const double s_max = s.maxCoeff();
    SpatialIndex index(points);
    std::vector<Index> hits;
    Eigen::RowVectorXd q_row(points.cols());
    for (Index i = 0; i < n; ++i) {
      q_row = points.row(i);
      const double radius = std::sqrt(c * s[i] * s_max * q_max);
      index.radius(q_row.data(), radius, &hits);
      for (Index j : hits) {
        if (j < i) continue;
        const double q = sq_dist_rows(points, i, j) / (c * s[i] * s[j]);
        if (q > q_max) continue;
        const double w = std::exp(-q) * nrm[i] * nrm[j];
        wmax = std::max(wmax, w);
        coo.push_back({i, j, w});
      }
    }
  }

  // enforce the storage contract: nothing below tol * max entry
  const double thr = tol * wmax;
  if (thr > 0.0) {
    std::size_t keep = 0;
    for (const Coo& e : coo)
      if (e.w >= thr) coo[keep++] = e;
    coo.resize(keep);
  }

  AffinityMatrix W;
  W.n = n;
  W.spec = spec;
  W.row_ptr.assign(n + 1, 0);
  for (const Coo& e : coo) {
    ++W.row_ptr[e.i + 1];
    if (e.i != e.j) ++W.row_ptr[e.j + 1];
  }
  for (Index r = 0; r < n; ++r) W.row_ptr[r + 1] += W.row_ptr[r];
  W.col.resize(W.row_ptr[n]);
  W.val.resize(W.row_ptr[n]);
  std::vector<Index> cursor(W.row_ptr.begin(), W.row_ptr.end() - 1);
  for (const Coo& e : coo) {
    W.col[cursor[e.i]] = e.j;
    W.val[cursor[e.i]] = e.w;
    ++cursor[e.i];
    if (e.i != e.j) {
      W.col[cursor[e.j]] = e.i;
      W.val[cursor[e.j]] = e.w;
      ++cursor[e.j];
    }
  }
  return W;
}

Vec power_vec(const Vec& base, double expo) {
  Vec out(base.size());
  for (Index i = 0; i < base.size(); ++i) out[i] = std::pow(base[i], expo);
  return out;
}

}  // namespace

KernelVariant kernel_variant_from_name(const std::string& name) {
  if (name == "selftuned_alpha") return KernelVariant::selftuned_alpha;
  if (name == "fixed_beta") return KernelVariant::fixed_beta;
  if (name == "mixed_rho_p") return KernelVariant::mixed_rho_p;
  if (name == "mnist_w1") return KernelVariant::mnist_w1;
  if (name == "mnist_wprime") return KernelVariant::mnist_wprime;
  throw std::invalid_argument("unknown kernel variant: " + name);
}

std::string kernel_variant_name(KernelVariant v) {
  switch (v) {
    case KernelVariant::selftuned_alpha: return "selftuned_alpha";
    case KernelVariant::fixed_beta: return "fixed_beta";
    case KernelVariant::mixed_rho_p: return "mixed_rho_p";
    case KernelVariant::mnist_w1: return "mnist_w1";
    case KernelVariant::mnist_wprime: return "mnist_wprime";
  }
  throw std::logic_error("unreachable kernel variant");
}

double AffinityMatrix::entry(Index i, Index j) const {
  const auto begin = col.begin() + row_ptr[i];
  const auto end = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return val[it - col.begin()];
}

Vec AffinityMatrix::degree() const {
  Vec d = Vec::Zero(n);
  for (Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += val[p];
    d[r] = acc;
  }
  return d;
}

Vec AffinityMatrix::offdiag_degree() const {
  Vec d = Vec::Zero(n);
  for (Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      if (col[p] != r) acc += val[p];
    d[r] = acc;
  }
  return d;
}

Vec AffinityMatrix::matvec(const Vec& f) const {
  if (f.size() != n)
    throw std::invalid_argument("AffinityMatrix::matvec: size mismatch");
  Vec out = Vec::Zero(n);
  for (Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      acc += val[p] * f[col[p]];
    out[r] = acc;
  }
  return out;
}

std::vector<std::tuple<Index, Index, double>> AffinityMatrix::upper_triplets()
    const {
  std::vector<std::tuple<Index, Index, double>> out;
  for (Index r = 0; r < n; ++r)
    for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      if (col[p] >= r) out.emplace_back(r, col[p], val[p]);
  return out;
}

AffinityMatrix build_selftuned(const Mat& points, const BandwidthField& bw,
                               const KernelSpec& spec) {
  if (spec.variant != KernelVariant::selftuned_alpha)
    throw std::invalid_argument("build_selftuned: wrong variant in spec");
  if (spec.eps && spec.sigma0)
    throw std::invalid_argument(
        "build_selftuned: give eps or sigma0, not both");
  if (spec.eps) {
    if (!(*spec.eps > 0.0))
      throw std::invalid_argument("build_selftuned: eps must be > 0");
    return assemble(points, *spec.eps, bw.rho_hat,
                    power_vec(bw.rho_hat, -spec.alpha), spec);
  }
  if (spec.sigma0) {
    if (!(*spec.sigma0 > 0.0))
      throw std::invalid_argument("build_selftuned: sigma0 must be > 0");
    return assemble(points, (*spec.sigma0) * (*spec.sigma0), bw.knn_dist,
                    power_vec(bw.knn_dist, -spec.alpha), spec);
  }
  throw std::invalid_argument("build_selftuned: eps or sigma0 required");
}

AffinityMatrix build_fixed(const Mat& points, const Vec& p_hat,
                           const KernelSpec& spec) {
  if (spec.variant != KernelVariant::fixed_beta)
    throw std::invalid_argument("build_fixed: wrong variant in spec");
  if (!spec.eps || !(*spec.eps > 0.0))
    throw std::invalid_argument("build_fixed: eps required");
  if (spec.beta > 1.0)
    throw std::invalid_argument("build_fixed: beta must be <= 1");
  const Index n = points.rows();
  Vec nrm;
  if (spec.beta == 0.0) {
    nrm = Vec::Ones(n);
  } else {
    if (p_hat.size() != n)
      throw std::invalid_argument("build_fixed: p_hat size mismatch");
    for (Index i = 0; i < n; ++i)
      if (!(p_hat[i] > 0.0))
        throw std::invalid_argument("build_fixed: p_hat must be positive");
    nrm = power_vec(p_hat, -spec.beta);
  }
  return assemble(points, *spec.eps, Vec::Ones(n), nrm, spec);
}

AffinityMatrix build_mixed(const Mat& points, const BandwidthField& bw,
                           const Vec& p_hat, const KernelSpec& spec) {
  if (spec.variant != KernelVariant::mixed_rho_p)
    throw std::invalid_argument("build_mixed: wrong variant in spec");
  if (!spec.eps || !(*spec.eps > 0.0))
    throw std::invalid_argument("build_mixed: eps required");
  if (p_hat.size() != points.rows())
    throw std::invalid_argument("build_mixed: p_hat size mismatch");
  Vec nrm(points.rows());
  for (Index i = 0; i < points.rows(); ++i) {
    if (!(p_hat[i] > 0.0))
      throw std::invalid_argument("build_mixed: p_hat must be positive");
    nrm[i] = 1.0 / (bw.rho_hat[i] * std::sqrt(p_hat[i]));
  }
  return assemble(points, *spec.eps, bw.rho_hat, nrm, spec);
}

MnistKernels build_mnist_variants(const Mat& points, const BandwidthField& bw,
                                  const Vec& mu_hat, const KernelSpec& spec) {
  if (spec.variant != KernelVariant::mnist_w1 &&
      spec.variant != KernelVariant::mnist_wprime)
    throw std::invalid_argument("build_mnist_variants: wrong variant in spec");
  if (!spec.sigma0 || !(*spec.sigma0 > 0.0))
    throw std::invalid_argument("build_mnist_variants: sigma0 required");
  if (mu_hat.size() != points.rows())
    throw std::invalid_argument("build_mnist_variants: mu_hat size mismatch");

  const double s0 = *spec.sigma0;
  const Index n = points.rows();
  Vec nrm1(n), nrm2(n);
  for (Index i = 0; i < n; ++i) {
    nrm1[i] = 1.0 / (s0 * bw.knn_dist[i]);
    if (!(mu_hat[i] > 0.0))
      throw std::invalid_argument(
          "build_mnist_variants: mu_hat must be positive");
    nrm2[i] = nrm1[i] / std::sqrt(mu_hat[i]);
  }

  MnistKernels out;
  KernelSpec s1 = spec;
  s1.variant = KernelVariant::mnist_w1;
  out.w1 = assemble(points, s0 * s0, bw.knn_dist, nrm1, s1);
  KernelSpec s2 = spec;
  s2.variant = KernelVariant::mnist_wprime;
  out.wprime = assemble(points, s0 * s0, bw.knn_dist, nrm2, s2);
  return out;
}

}  // namespace selftune
