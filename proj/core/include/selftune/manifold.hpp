#pragma once

#include <string>
#include <vector>

#include "selftune/types.hpp"

namespace selftune {

// ---------------------------------------------------------------------------
// Density profiles on the unit-length closed curve, parametrized by arclength
// t in [0,1). p(t) = normalization * (offset + sum_m a_m cos(2 pi m t)
//                                            + b_m sin(2 pi m t))
// ---------------------------------------------------------------------------

struct HarmonicTerm {
  int frequency = 1;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

class DensityProfile {
 public:
  DensityProfile(std::vector<HarmonicTerm> terms, double offset);

  // Preset profiles, selectable by name in experiment configs:
  //   "uniform"    p == 1
  //   "sine_well"  1 - 0.95 sin(2 pi t): min 0.05 at t = 1/4, max 1.95 at 3/4
  //   "deep_well"  1 - 0.98 sin(2 pi t): min 0.02, for outlier experiments
  static DensityProfile preset(const std::string& name);

  double eval(double t) const;    // p(t), normalized
  double deriv(double t) const;   // p'(t)
  double cdf(double t) const;     // F(t) = int_0^t p, analytic
  double min_density() const { return min_density_; }
  double normalization() const { return normalization_; }

  const std::vector<HarmonicTerm>& terms() const { return terms_; }
  double offset() const { return offset_; }

 private:
  double eval_unnormalized(double t) const;
  void validate_and_normalize();

  std::vector<HarmonicTerm> terms_;
  double offset_ = 1.0;
  double normalization_ = 1.0;
  double min_density_ = 0.0;
};

// ---------------------------------------------------------------------------
// Smooth test functions f(t) = sum_m amp_m sin(2 pi freq_m t + phase_m),
// with analytic first and second derivatives.
// ---------------------------------------------------------------------------

struct SinusoidTerm {
  int frequency = 1;
  double amplitude = 1.0;
  double phase = 0.0;
};

class TestFunction {
 public:
  explicit TestFunction(std::vector<SinusoidTerm> terms);

  // f(t) = sin(2 pi t) + 0.5 cos(6 pi t), the harness default
  static TestFunction preset_default();

  double eval(double t) const;
  double d1(double t) const;
  double d2(double t) const;

  const std::vector<SinusoidTerm>& terms() const { return terms_; }

 private:
  std::vector<SinusoidTerm> terms_;
};

// ---------------------------------------------------------------------------
// Synthetic datasets: closed curves of total length 1, sampled under a
// chosen density in the arclength coordinate. Generators:
//   circle_r2  circle of radius 1/(2 pi) in R^2 (exactly unit speed)
//   curve_r4   closed curve in R^4 from three fixed low-frequency Fourier
//              modes per coordinate, numerically reparametrized to unit-speed
//              arclength on a 2^14-node grid and rescaled to length 1
// ---------------------------------------------------------------------------

enum class Generator { circle_r2, curve_r4 };

Generator generator_from_name(const std::string& name);
std::string generator_name(Generator g);

class ManifoldDataset {
 public:
  ManifoldDataset(Generator gen, DensityProfile density);

  Generator generator() const { return generator_; }
  const DensityProfile& density() const { return density_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return 1; }

  // ambient embedding of the arclength parameter
  Eigen::RowVectorXd embed(double t) const;

  // draw N i.i.d. samples of t from p via inverse-CDF lookup, then embed
  PointCloud sample(Index n, std::uint64_t seed) const;

  double eval_density(double t) const { return density_.eval(t); }
  double eval_density_deriv(double t) const { return density_.deriv(t); }

  // bar-rho(t) = p(t)^(-1/d), the population bandwidth scale
  double eval_barrho(double t) const;

  // weighted Laplacian with drift:
  //   Lf = f'' + (1 + 2(alpha-1)/d) (p'/p) f'
  // alpha = 1 gives f'' + (p'/p) f'; alpha = 1 - d/2 gives plain f''
  double eval_weighted_laplacian(const TestFunction& f, double t,
                                 double alpha) const;

  // continuum Dirichlet energy int_0^1 p_alpha |f'|^2 dt with
  // p_alpha = p^(1 + 2(alpha-1)/d), by trapezoid quadrature on the dense grid
  double dirichlet_energy(const TestFunction& f, double alpha) const;

  // density weight p_alpha(t) = p(t)^(1 + 2(alpha-1)/d)
  double eval_density_weight(double t, double alpha) const;

 private:
  void build_arclength_tables();
  double raw_param_for(double t) const;  // arclength t -> raw curve parameter

  Generator generator_;
  DensityProfile density_;
  int ambient_dim_ = 2;

  // curve_r4 reparametrization tables (empty for circle_r2)
  std::vector<double> arc_s_;  // normalized cumulative arclength at node i
  double total_length_ = 1.0;
};

ManifoldDataset make_dataset(const std::string& generator,
                             const DensityProfile& density);

}  // namespace selftune
