#pragma once

#include "selftune/kernels.hpp"

namespace selftune {

// Constants tying the graph operators to their continuum limits; m0/m2 are
// the moments of k0 in dimension d (Gaussian values filled by the factory).
struct OperatorConfig {
  double eps = 1e-3;
  double alpha = 1.0;
  int d = 1;
  double m0 = 0.0;
  double m2 = 0.0;
};

OperatorConfig operator_config(double eps, double alpha, int d);

// Un-normalized graph Laplacian applied to samples of f. W must be the
// eps-form self-tuned kernel consistent with cfg:
//   (L_un f)_i = 2 eps^(-d/2-1) / (m2 N) * sum_j W_ij (f_j - f_i)
Vec apply_L_un(const AffinityMatrix& W, const Vec& f,
               const OperatorConfig& cfg);

// Modified random-walk Laplacian; bw supplies the rho-hat entering the
// inverse-square bandwidth diagonal:
//   (L_rw' f)_i = 2 m0 / (eps m2 rho_i^2) * ((W f)_i / D_i - f_i)
Vec apply_L_rw_prime(const AffinityMatrix& W, const BandwidthField& bw,
                     const Vec& f, const OperatorConfig& cfg);

// Graph Dirichlet form
//   E_N(f, f) = eps^(-d/2) / (eps m2 N^2) * sum_ij W_ij (f_i - f_j)^2,
// the discrete estimate of int p_alpha |grad f|^2
double dirichlet_form(const AffinityMatrix& W, const Vec& f,
                      const OperatorConfig& cfg);

// L1 / sup error summaries of an operator estimate against ground truth,
// plus forms relative to ||truth||_1 and ||truth||_inf
struct ErrorMetrics {
  double err1 = 0.0;
  double err_inf = 0.0;
  double rel1 = 0.0;
  double rel_inf = 0.0;
};

ErrorMetrics error_metrics(const Vec& estimate, const Vec& truth);

}  // namespace selftune
