#include "selftune/laplacian.hpp"

#include <cmath>

#include "selftune/moments.hpp"

namespace selftune {

namespace {

void check_cfg(const OperatorConfig& cfg) {
  if (!(cfg.eps > 0.0))
    throw std::invalid_argument("operator: eps must be positive");
  if (cfg.d < 1) throw std::invalid_argument("operator: d must be >= 1");
  if (!(cfg.m0 > 0.0) || !(cfg.m2 > 0.0))
    throw std::invalid_argument("operator: moment constants must be positive");
}

}  // namespace

OperatorConfig operator_config(double eps, double alpha, int d) {
  OperatorConfig cfg;
  cfg.eps = eps;
  cfg.alpha = alpha;
  cfg.d = d;
  cfg.m0 = gaussian_m0(d);
  cfg.m2 = gaussian_m2(d);
  check_cfg(cfg);
  return cfg;
}

Vec apply_L_un(const AffinityMatrix& W, const Vec& f,
               const OperatorConfig& cfg) {
  check_cfg(cfg);
  if (f.size() != W.n)
    throw std::invalid_argument("apply_L_un: f size mismatch");
  const double pref = 2.0 * std::pow(cfg.eps, -0.5 * cfg.d - 1.0) /
                      (cfg.m2 * static_cast<double>(W.n));
  const Vec Wf = W.matvec(f);
  const Vec deg = W.degree();
  Vec out(W.n);
  for (Index i = 0; i < W.n; ++i)
    out[i] = pref * (Wf[i] - deg[i] * f[i]);
  return out;
}

Vec apply_L_rw_prime(const AffinityMatrix& W, const BandwidthField& bw,
                     const Vec& f, const OperatorConfig& cfg) {
  check_cfg(cfg);
  if (f.size() != W.n)
    throw std::invalid_argument("apply_L_rw_prime: f size mismatch");
  if (bw.rho_hat.size() != W.n)
    throw std::invalid_argument("apply_L_rw_prime: bandwidth size mismatch");
  const double pref = 2.0 * cfg.m0 / (cfg.eps * cfg.m2);
  const Vec Wf = W.matvec(f);
  const Vec deg = W.degree();
  Vec out(W.n);
  for (Index i = 0; i < W.n; ++i) {
    if (!(deg[i] > 0.0))
      throw std::runtime_error("apply_L_rw_prime: zero degree row");
    const double rho = bw.rho_hat[i];
    out[i] = pref / (rho * rho) * (Wf[i] / deg[i] - f[i]);
  }
  return out;
}

double dirichlet_form(const AffinityMatrix& W, const Vec& f,
                      const OperatorConfig& cfg) {
  check_cfg(cfg);
  if (f.size() != W.n)
    throw std::invalid_argument("dirichlet_form: f size mismatch");
  // sum over stored entries covers both (i,j) and (j,i); each term >= 0
  double acc = 0.0;
  for (Index r = 0; r < W.n; ++r)
    for (Index p = W.row_ptr[r]; p < W.row_ptr[r + 1]; ++p) {
      const double diff = f[r] - f[W.col[p]];
      acc += W.val[p] * diff * diff;
    }
  const double n = static_cast<double>(W.n);
  return std::pow(cfg.eps, -0.5 * cfg.d) / (cfg.eps * cfg.m2 * n * n) * acc;
}

ErrorMetrics error_metrics(const Vec& estimate, const Vec& truth) {
  if (estimate.size() != truth.size() || estimate.size() == 0)
    throw std::invalid_argument("error_metrics: bad input sizes");
  ErrorMetrics m;
  m.err1 = (estimate - truth).cwiseAbs().sum();
  m.err_inf = (estimate - truth).cwiseAbs().maxCoeff();
  const double t1 = truth.cwiseAbs().sum();
  const double tinf = truth.cwiseAbs().maxCoeff();
  if (t1 == 0.0 || tinf == 0.0)
    throw std::invalid_argument("error_metrics: zero truth norm");
  m.rel1 = m.err1 / t1;
  m.rel_inf = m.err_inf / tinf;
  return m;
}

}  // namespace selftune
