// Acceptance gate: ten numbered checks, each printing a single
// "criterion <n>: pass|fail" line (informational values on "info:" lines
// above it). Exit code 0 iff the requested criterion passes.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "selftune/bandwidth.hpp"
#include "selftune/experiments.hpp"
#include "selftune/kernels.hpp"
#include "selftune/knn.hpp"
#include "selftune/laplacian.hpp"
#include "selftune/manifold.hpp"
#include "selftune/moments.hpp"
#include "selftune/rng.hpp"
#include "selftune/spectral.hpp"

using namespace selftune;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> info;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Mat random_cloud(Index n, int d, Rng* rng, double scale = 1.0) {
  Mat x(n, d);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) x(i, c) = rng->uniform(-scale, scale);
  return x;
}

// squared distance with the same left-to-right accumulation the library uses
double sq_dist(const Mat& pts, Index i, Index j) {
  double acc = 0.0;
  for (Index c = 0; c < pts.cols(); ++c) {
    const double diff = pts(i, c) - pts(j, c);
    acc += diff * diff;
  }
  return acc;
}

double median(Vec v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
  double hi = s[s.size() / 2];
  if (s.size() % 2 == 1) return hi;
  std::nth_element(s.begin(), s.begin() + s.size() / 2 - 1, s.end());
  return 0.5 * (s[s.size() / 2 - 1] + hi);
}

// ----------------------------------------------------------------- 1
// spatial-index k-th neighbor distance equals full-sort brute force
// exactly on 50 random configurations (N <= 500, D in {1,2,3,10})
Outcome criterion1() {
  Rng rng(9001);
  const int dims[] = {1, 2, 3, 10};
  long violations = 0;
  for (int c = 0; c < 50; ++c) {
    const int d = dims[rng.raw() % 4];
    const Index n = 50 + static_cast<Index>(rng.raw() % 451);
    const int k = 2 + static_cast<int>(rng.raw() % 15);
    const Mat x = random_cloud(n, d, &rng);
    const SpatialIndex index(x);
    const Mat dist = knn_distances(index, x, k, /*exclude_self=*/true);

    std::vector<double> all;
    for (Index i = 0; i < n; ++i) {
      all.clear();
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        all.push_back(std::sqrt(sq_dist(x, j, i)));
      }
      std::sort(all.begin(), all.end());
      if (dist(i, k - 1) != all[k - 1]) ++violations;
    }
  }
  Outcome o;
  o.pass = violations == 0;
  o.info.push_back("exact mismatches: " + std::to_string(violations));
  return o;
}

// ----------------------------------------------------------------- 2
// |R(x) - R(x')| <= ||x - x'|| + 1e-12 over 1e4 random query pairs
// (refs N=300, D=3, k=5), zero violations
Outcome criterion2() {
  Rng rng(9002);
  const Mat refs = random_cloud(300, 3, &rng);
  const SpatialIndex index(refs);
  const int pairs = 10000;
  Mat queries(2 * pairs, 3);
  for (Index i = 0; i < queries.rows(); ++i)
    for (int c = 0; c < 3; ++c) queries(i, c) = rng.uniform(-1.2, 1.2);
  const Mat dist = knn_distances(index, queries, 5, /*exclude_self=*/false);

  long violations = 0;
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Index a = 2 * p, b = 2 * p + 1;
    const double gap = (queries.row(a) - queries.row(b)).norm();
    const double slack = std::abs(dist(a, 4) - dist(b, 4)) - gap;
    worst = std::max(worst, slack);
    if (slack > 1e-12) ++violations;
  }
  Outcome o;
  o.pass = violations == 0;
  o.info.push_back("violations: " + std::to_string(violations) +
                   ", worst slack: " + fmt(worst));
  return o;
}

// ----------------------------------------------------------------- 3
// operator evaluations match literal scalar sums to 1e-12 relative;
// the generalized eigensolver matches a dense factorization to 1e-8
Outcome criterion3() {
  Rng rng(9003);
  double worst_rel = 0.0;
  for (int inst = 0; inst < 12; ++inst) {
    const Index n = 5 + static_cast<Index>(rng.raw() % 26);
    const int d = 1 + static_cast<int>(rng.raw() % 2);
    const double eps = rng.uniform(0.1, 1.0);
    const double alphas[] = {0.0, 0.5, 1.0};
    const double alpha = alphas[rng.raw() % 3];
    const Mat x = random_cloud(n, d, &rng);
    Vec rho(n), f(n);
    for (Index i = 0; i < n; ++i) {
      rho[i] = rng.uniform(0.3, 1.5);
      f[i] = rng.uniform(-1.0, 1.0);
    }
    BandwidthField bw;
    bw.knn_dist = rho;
    bw.rho_hat = rho;
    bw.k = 2;
    bw.n_ref = n;
    bw.d = d;
    KernelSpec spec;
    spec.variant = KernelVariant::selftuned_alpha;
    spec.eps = eps;
    spec.alpha = alpha;
    spec.truncation_tol = 0.0;
    const AffinityMatrix W = build_selftuned(x, bw, spec);
    const OperatorConfig cfg = operator_config(eps, alpha, d);

    // literal sums
    Mat wd(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const double q = sq_dist(x, j, i) / (eps * rho[i] * rho[j]);
        wd(i, j) = std::exp(-q) / std::pow(rho[i] * rho[j], alpha);
      }
    Vec lu_ref(n), lr_ref(n);
    double energy = 0.0;
    for (Index i = 0; i < n; ++i) {
      double flux = 0.0, num = 0.0, den = 0.0;
      for (Index j = 0; j < n; ++j) {
        flux += wd(i, j) * (f[j] - f[i]);
        num += wd(i, j) * f[j];
        den += wd(i, j);
        energy += wd(i, j) * (f[i] - f[j]) * (f[i] - f[j]);
      }
      lu_ref[i] = 2.0 * std::pow(eps, -0.5 * d - 1.0) /
                  (cfg.m2 * static_cast<double>(n)) * flux;
      lr_ref[i] = 2.0 * cfg.m0 / (eps * cfg.m2 * rho[i] * rho[i]) *
                  (num / den - f[i]);
    }
    const double e_ref = std::pow(eps, -0.5 * d) /
                         (eps * cfg.m2 * static_cast<double>(n * n)) * energy;

    const Vec lu = apply_L_un(W, f, cfg);
    const Vec lr = apply_L_rw_prime(W, bw, f, cfg);
    const double e = dirichlet_form(W, f, cfg);
    const double rel_lu = (lu - lu_ref).cwiseAbs().maxCoeff() /
                          lu_ref.cwiseAbs().maxCoeff();
    const double rel_lr = (lr - lr_ref).cwiseAbs().maxCoeff() /
                          lr_ref.cwiseAbs().maxCoeff();
    const double rel_e = std::abs(e - e_ref) / e_ref;
    worst_rel = std::max({worst_rel, rel_lu, rel_lr, rel_e});
  }

  // dense generalized eigensolver oracle
  double worst_eig = 0.0;
  {
    const Index n = 25;
    const Mat x = random_cloud(n, 2, &rng, 0.7);
    Vec rho(n);
    for (Index i = 0; i < n; ++i) rho[i] = rng.uniform(0.4, 1.2);
    BandwidthField bw;
    bw.knn_dist = rho;
    bw.rho_hat = rho;
    bw.k = 2;
    bw.n_ref = n;
    KernelSpec spec;
    spec.variant = KernelVariant::selftuned_alpha;
    spec.eps = 0.3;
    spec.truncation_tol = 0.0;
    const AffinityMatrix W = build_selftuned(x, bw, spec);
    const int m = 6;
    const SpectralResult res = eig_rw_prime(W, rho, m);

    Mat wd = Mat::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) wd(i, j) = W.entry(i, j);
    Mat l = -wd;
    const Vec deg = wd.rowwise().sum();
    l.diagonal() += deg;
    Mat b = Mat::Zero(n, n);
    for (Index i = 0; i < n; ++i) b(i, i) = deg[i] * rho[i] * rho[i];
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ref(l, b);
    for (int k = 0; k < m; ++k) {
      const double scale = std::max(1.0, std::abs(ref.eigenvalues()[m - 1]));
      worst_eig = std::max(
          worst_eig,
          std::abs(res.eigenvalues[k] - ref.eigenvalues()[k]) / scale);
    }
  }

  Outcome o;
  o.pass = worst_rel <= 1e-12 && worst_eig <= 1e-8;
  o.info.push_back("worst operator relative error: " + fmt(worst_rel) +
                   " (tolerance 1e-12)");
  o.info.push_back("worst eigenvalue relative error: " + fmt(worst_eig) +
                   " (tolerance 1e-8)");
  return o;
}

// ----------------------------------------------------------------- 4
// low/high-density decile ratio of mean |rel err|: <= 1.5 for the kNN
// bandwidth, >= 2 for the matched-bandwidth KDE (N_y=5000, k_y=16,
// 100 repeats)
Outcome criterion4() {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::bandwidth_profile;
  cfg.generator = "circle_r2";
  cfg.density = "sine_well";
  cfg.n_y = 5000;
  cfg.ky_list = {16};
  cfg.repeats = 100;
  cfg.locations = 500;
  cfg.seed = 1234;
  const BandwidthProfileResult res = run_bandwidth_profile(cfg);

  std::vector<int> order(res.t_loc.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return res.p_loc[a] < res.p_loc[b]; });
  const std::size_t decile = order.size() / 10;

  double rho_low = 0.0, rho_high = 0.0, kde_low = 0.0, kde_high = 0.0;
  for (std::size_t i = 0; i < decile; ++i) {
    rho_low += res.rho_err[0][order[i]].mean;
    kde_low += res.kde_err[0][order[i]].mean;
    rho_high += res.rho_err[0][order[order.size() - 1 - i]].mean;
    kde_high += res.kde_err[0][order[order.size() - 1 - i]].mean;
  }
  const double rho_ratio = rho_low / rho_high;
  const double kde_ratio = kde_low / kde_high;

  Outcome o;
  o.pass = rho_ratio <= 1.5 && kde_ratio >= 2.0;
  o.info.push_back("knn bandwidth decile ratio: " + fmt(rho_ratio) +
                   " (must be <= 1.5)");
  o.info.push_back("kde decile ratio: " + fmt(kde_ratio) +
                   " (must be >= 2)");
  o.info.push_back("matched kde eps: " + fmt(res.eps_matched[0]));
  return o;
}

// ----------------------------------------------------------------- 5
// sup-error decay along N_y = 2000..32000 with k_y ~ N_y^0.8:
// log-log slope in [-0.55, -0.25] with r^2 >= 0.9 (100 repeats).
// Uniform density keeps the k-NN window small relative to the density's
// variation scale, so the balanced-scaling variance rate (the N^-0.4 law)
// is what the sup statistic measures at these sample sizes.
Outcome criterion5() {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::bandwidth_rate;
  cfg.generator = "circle_r2";
  cfg.density = "uniform";
  cfg.repeats = 100;
  cfg.locations = 500;
  cfg.seed = 1234;
  const BandwidthRateResult res = run_bandwidth_rate(cfg);

  Outcome o;
  o.pass = res.fit.slope >= -0.55 && res.fit.slope <= -0.25 &&
           res.fit.r2 >= 0.9;
  std::string kys;
  for (int k : res.ky) kys += std::to_string(k) + " ";
  o.info.push_back("k_y grid: " + kys);
  o.info.push_back("slope: " + fmt(res.fit.slope) +
                   " (must be in [-0.55, -0.25])");
  o.info.push_back("r2: " + fmt(res.fit.r2) + " (must be >= 0.9)");
  return o;
}

ConvergenceSweepResult desk_sweep() {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::dirichlet_sweep;
  cfg.generator = "circle_r2";
  cfg.density = "sine_well";
  cfg.alpha = 1.0;
  cfg.n_x = 2000;
  cfg.n_y = 4000;
  cfg.k_y = 256;
  cfg.repeats = 100;
  cfg.seed = 1234;
  return run_convergence_sweep(cfg);
}

// ----------------------------------------------------------------- 6
// best-over-eps mean relative Dirichlet error <= 0.10 and the energy
// curve is flatter (slope >= -0.3) than the sup-error curve (<= -0.5)
// on the shared small-eps window
Outcome criterion6() {
  const ConvergenceSweepResult res = desk_sweep();
  Outcome o;
  o.pass = res.best_dirichlet_rel <= 0.10 &&
           res.dirichlet_fit.slope >= -0.3 && res.errinf_fit.slope <= -0.5;
  o.info.push_back("best dirichlet rel err: " + fmt(res.best_dirichlet_rel) +
                   " (must be <= 0.10)");
  o.info.push_back("dirichlet window slope: " + fmt(res.dirichlet_fit.slope) +
                   " (must be >= -0.3)");
  o.info.push_back("err_inf window slope: " + fmt(res.errinf_fit.slope) +
                   " (must be <= -0.5)");
  o.info.push_back("window: [" + std::to_string(res.window.first) + ", " +
                   std::to_string(res.window.second) + "] of " +
                   std::to_string(res.eps.size()) + " eps points");
  return o;
}

// ----------------------------------------------------------------- 7
// small-eps relative Err_inf slope = -0.75 +/- 0.20; the best Err_inf
// level is logged, not asserted
Outcome criterion7() {
  const ConvergenceSweepResult res = desk_sweep();
  Outcome o;
  o.pass = res.errinf_fit.slope >= -0.95 && res.errinf_fit.slope <= -0.55;
  o.info.push_back("err_inf window slope: " + fmt(res.errinf_fit.slope) +
                   " (must be in [-0.95, -0.55])");
  o.info.push_back("best err_inf rel (logged only): " +
                   fmt(res.best_errinf_rel));
  return o;
}

// ----------------------------------------------------------------- 8
// every kernel variant: W symmetric, entries >= 0, (D - W) 1 = 0 to
// 1e-10 relative, Dirichlet form nonnegative
Outcome criterion8() {
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("sine_well"));
  const PointCloud cloud = ds.sample(400, 9008);
  const Mat& x = cloud.coords;
  const SpatialIndex index(x);
  const BandwidthField bw = bandwidth_field(index, x, 16, 1, true);
  const double eps_kde = median(bw.knn_dist) * median(bw.knn_dist);
  const Vec p_hat = kde_density(index, x, eps_kde, 1);
  const Vec mu_hat = unnormalized_density(index, x, eps_kde);

  std::vector<std::pair<std::string, AffinityMatrix>> mats;
  {
    KernelSpec s;
    s.variant = KernelVariant::selftuned_alpha;
    s.eps = 1e-3;
    s.alpha = 1.0;
    mats.emplace_back("selftuned eps-form", build_selftuned(x, bw, s));
  }
  {
    KernelSpec s;
    s.variant = KernelVariant::selftuned_alpha;
    s.sigma0 = 0.3;
    s.alpha = 0.5;
    mats.emplace_back("selftuned sigma0-form", build_selftuned(x, bw, s));
  }
  {
    KernelSpec s;
    s.variant = KernelVariant::fixed_beta;
    s.eps = 1e-3;
    s.beta = 0.5;
    mats.emplace_back("fixed beta=1/2", build_fixed(x, p_hat, s));
  }
  {
    KernelSpec s;
    s.variant = KernelVariant::mixed_rho_p;
    s.eps = 1e-3;
    mats.emplace_back("mixed rho-p", build_mixed(x, bw, p_hat, s));
  }
  {
    KernelSpec s;
    s.variant = KernelVariant::mnist_w1;
    s.sigma0 = 0.3;
    const MnistKernels pair = build_mnist_variants(x, bw, mu_hat, s);
    mats.emplace_back("sigma0 pair W1", pair.w1);
    mats.emplace_back("sigma0 pair W'", pair.wprime);
  }

  Rng rng(9018);
  bool all_ok = true;
  Outcome o;
  for (const auto& [name, W] : mats) {
    bool nonneg = true, symmetric = true;
    for (double v : W.val) nonneg = nonneg && v >= 0.0;
    for (const auto& [i, j, w] : W.upper_triplets())
      symmetric = symmetric && W.entry(j, i) == w;
    const Vec deg = W.degree();
    const Vec null_resid = deg - W.matvec(Vec::Ones(W.n));
    const double rel_null =
        null_resid.cwiseAbs().maxCoeff() / deg.cwiseAbs().maxCoeff();
    bool energy_ok = true;
    const OperatorConfig cfg = operator_config(0.1, 1.0, 1);
    for (int t = 0; t < 5; ++t) {
      Vec f(W.n);
      for (Index i = 0; i < W.n; ++i) f[i] = rng.uniform(-2.0, 2.0);
      energy_ok = energy_ok && dirichlet_form(W, f, cfg) >= 0.0;
    }
    const bool ok = nonneg && symmetric && rel_null <= 1e-10 && energy_ok;
    all_ok = all_ok && ok;
    o.info.push_back(name + ": nullspace rel resid " + fmt(rel_null) +
                     (ok ? " ok" : " FAILED"));
  }
  o.pass = all_ok;
  return o;
}

// ----------------------------------------------------------------- 9
// rw' eigenvectors of the mixed kernel recover the first circle
// harmonics: energy of vectors 1-2 in span{sin 2 pi t, cos 2 pi t}
// >= 0.90, vectors 3-4 in span{sin 4 pi t, cos 4 pi t} >= 0.80
Outcome criterion9() {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::embedding;
  cfg.generator = "circle_r2";
  cfg.density = "sine_well";
  cfg.variant = "mixed_rho_p";
  cfg.n_x = 1000;
  cfg.k_x = 21;
  cfg.eps = 1e-4;
  cfg.eigenpairs = 6;
  cfg.seed = 1234;
  const EmbeddingResult res = run_embedding_once(cfg, 0.0, cfg.seed);

  const Vec& t = *res.cloud.param;
  const Index n = t.size();
  const double two_pi = 2.0 * 3.14159265358979323846;
  auto span_energy = [&](const Vec& v, int freq) {
    Mat s(n, 2);
    for (Index i = 0; i < n; ++i) {
      s(i, 0) = std::sin(two_pi * freq * t[i]);
      s(i, 1) = std::cos(two_pi * freq * t[i]);
    }
    const Vec coef = s.colPivHouseholderQr().solve(v);
    return (s * coef).squaredNorm() / v.squaredNorm();
  };

  double frac[4];
  for (int k = 0; k < 4; ++k) {
    const Vec v = res.rw.eigenvectors.col(k + 1);  // col 0 is the constant
    frac[k] = span_energy(v, k < 2 ? 1 : 2);
  }

  Outcome o;
  o.pass = frac[0] >= 0.90 && frac[1] >= 0.90 && frac[2] >= 0.80 &&
           frac[3] >= 0.80;
  o.info.push_back("frequency-1 span energies: " + fmt(frac[0]) + ", " +
                   fmt(frac[1]) + " (must be >= 0.90)");
  o.info.push_back("frequency-2 span energies: " + fmt(frac[2]) + ", " +
                   fmt(frac[3]) + " (must be >= 0.80)");
  return o;
}

// ----------------------------------------------------------------- 10
// deep low-density well: the fixed-bandwidth kernel (beta=0, bandwidth
// sigma0 * median R-hat) has an off-diagonal degree spread >= 10x the
// self-tuned W1 kernel's at the same sigma0
Outcome criterion10() {
  const ManifoldDataset ds =
      make_dataset("circle_r2", DensityProfile::preset("deep_well"));
  const PointCloud cloud = ds.sample(2000, 9010);
  const Mat& x = cloud.coords;
  const SpatialIndex index(x);
  const BandwidthField bw = bandwidth_field(index, x, 21, 1, true);
  const double sigma0 = 0.2;

  KernelSpec self_spec;
  self_spec.variant = KernelVariant::mnist_w1;
  self_spec.sigma0 = sigma0;
  self_spec.truncation_tol = 0.0;  // keep far tails representable
  const AffinityMatrix w_self =
      build_mnist_variants(x, bw, Vec::Ones(2000), self_spec).w1;

  KernelSpec fixed_spec;
  fixed_spec.variant = KernelVariant::fixed_beta;
  const double med = median(bw.knn_dist);
  fixed_spec.eps = sigma0 * med * (sigma0 * med);
  fixed_spec.beta = 0.0;
  fixed_spec.truncation_tol = 0.0;
  const AffinityMatrix w_fixed = build_fixed(x, Vec::Ones(2000), fixed_spec);

  const Vec d_self = w_self.offdiag_degree();
  const Vec d_fixed = w_fixed.offdiag_degree();
  const double self_min = d_self.minCoeff(), self_max = d_self.maxCoeff();
  const double fixed_min = d_fixed.minCoeff(), fixed_max = d_fixed.maxCoeff();

  const double inf = std::numeric_limits<double>::infinity();
  const double ratio_self = self_min > 0.0 ? self_max / self_min : inf;
  const double ratio_fixed = fixed_min > 0.0 ? fixed_max / fixed_min : inf;

  Outcome o;
  o.pass = ratio_self < inf &&
           (ratio_fixed == inf || ratio_fixed >= 10.0 * ratio_self);
  o.info.push_back("self-tuned degree ratio: " + fmt(ratio_self));
  o.info.push_back("fixed-bandwidth degree ratio: " +
                   (ratio_fixed == inf ? std::string("inf (isolated rows)")
                                       : fmt(ratio_fixed)) +
                   " (must be >= 10x self-tuned)");
  o.info.push_back("fixed bandwidth: sigma0 * median R-hat = " +
                   fmt(sigma0 * med));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..10>\n";
    return 2;
  }
  const int n = std::atoi(argv[1]);
  Outcome o;
  try {
    switch (n) {
      case 1: o = criterion1(); break;
      case 2: o = criterion2(); break;
      case 3: o = criterion3(); break;
      case 4: o = criterion4(); break;
      case 5: o = criterion5(); break;
      case 6: o = criterion6(); break;
      case 7: o = criterion7(); break;
      case 8: o = criterion8(); break;
      case 9: o = criterion9(); break;
      case 10: o = criterion10(); break;
      default:
        std::cerr << "usage: acceptance <criterion 1..10>\n";
        return 2;
    }
  } catch (const std::exception& e) {
    std::cout << "  info: exception: " << e.what() << "\n";
    std::cout << "criterion " << n << ": fail\n";
    return 1;
  }
  for (const std::string& line : o.info)
    std::cout << "  info: " << line << "\n";
  std::cout << "criterion " << n << ": " << (o.pass ? "pass" : "fail")
            << "\n";
  return o.pass ? 0 : 1;
}
