#include "selftune/moments.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "selftune/spectral.hpp"
#include "selftune/types.hpp"

namespace selftune {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr int kQuadNodes = 64;

// nodes/weights for int_0^inf v^a e^{-v} g(v) dv ~= sum w_i g(v_i), via
// Golub-Welsch on the generalized Laguerre Jacobi matrix
void gauss_laguerre(double a, std::vector<double>* nodes,
                    std::vector<double>* weights) {
  const int n = kQuadNodes;
  Vec diag(n), off(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = 2.0 * i + a + 1.0;
    off[i] = (i + 1 < n) ? std::sqrt((i + 1.0) * (i + 1.0 + a)) : 0.0;
  }
  Mat z = Mat::Identity(n, n);
  tridiag_eig(diag, off, &z);

  const double mu0 = std::tgamma(a + 1.0);
  nodes->resize(n);
  weights->resize(n);
  for (int i = 0; i < n; ++i) {
    (*nodes)[i] = diag[i];
    (*weights)[i] = mu0 * z(0, i) * z(0, i);
  }
}

// int_0^inf h(v) v^a dv with the e^{v} reweighting folded into the integrand;
// requires h to decay at least exponentially (Assumption-style profiles do)
double half_line_moment(const std::function<double(double)>& h, double a) {
  std::vector<double> v, w;
  gauss_laguerre(a, &v, &w);
  double acc = 0.0;
  for (int i = 0; i < kQuadNodes; ++i)
    acc += w[i] * h(v[i]) * std::exp(v[i]);
  return acc;
}

}  // namespace

double unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("unit_ball_volume: d must be >= 1");
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double gaussian_m0(int d) {
  if (d < 1) throw std::invalid_argument("gaussian_m0: d must be >= 1");
  return std::pow(kPi, 0.5 * d);
}

double gaussian_m2(int d) {
  if (d < 1) throw std::invalid_argument("gaussian_m2: d must be >= 1");
  return 0.5 * std::pow(kPi, 0.5 * d);
}

double kde_m0(int d) {
  if (d < 1) throw std::invalid_argument("kde_m0: d must be >= 1");
  return std::pow(2.0, d);
}

double kernel_m0(const std::function<double(double)>& h, int d) {
  if (d < 1) throw std::invalid_argument("kernel_m0: d must be >= 1");
  // m0 = (pi^(d/2) / Gamma(d/2)) int_0^inf h(v) v^(d/2 - 1) dv
  const double pref = std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return pref * half_line_moment(h, 0.5 * d - 1.0);
}

double kernel_m2(const std::function<double(double)>& h, int d) {
  if (d < 1) throw std::invalid_argument("kernel_m2: d must be >= 1");
  // m2 = (pi^(d/2) / (d Gamma(d/2))) int_0^inf h(v) v^(d/2) dv
  const double pref = std::pow(kPi, 0.5 * d) / (d * std::tgamma(0.5 * d));
  return pref * half_line_moment(h, 0.5 * d);
}

}  // namespace selftune
