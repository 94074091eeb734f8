#include "selftune/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "selftune/rng.hpp"

namespace selftune {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kGrid = 1 << 14;  // dense-grid resolution for tables/quadrature

// locate y in the monotone table c (size n+1 over [0,1]) and invert piecewise
// linearly; returns position in [0,1)
double pwl_invert(const std::vector<double>& c, double y) {
  auto it = std::upper_bound(c.begin(), c.end(), y);
  std::size_t i = (it == c.begin()) ? 0 : (it - c.begin() - 1);
  if (i >= c.size() - 1) i = c.size() - 2;
  const double lo = c[i], hi = c[i + 1];
  double frac = (hi > lo) ? (y - lo) / (hi - lo) : 0.0;
  frac = std::clamp(frac, 0.0, 1.0);
  return (static_cast<double>(i) + frac) / static_cast<double>(c.size() - 1);
}

double wrap01(double t) {
  double w = t - std::floor(t);
  return (w >= 1.0) ? 0.0 : w;
}

}  // namespace

// --------------------------------------------------------------------------
// DensityProfile

DensityProfile::DensityProfile(std::vector<HarmonicTerm> terms, double offset)
    : terms_(std::move(terms)), offset_(offset) {
  validate_and_normalize();
}

double DensityProfile::eval_unnormalized(double t) const {
  double v = offset_;
  for (const auto& h : terms_) {
    const double w = kTwoPi * h.frequency;
    v += h.cos_amp * std::cos(w * t) + h.sin_amp * std::sin(w * t);
  }
  return v;
}

void DensityProfile::validate_and_normalize() {
  for (const auto& h : terms_)
    if (h.frequency < 1)
      throw std::invalid_argument("DensityProfile: frequency must be >= 1");

  // trapezoid on the dense grid; for harmonic profiles this equals offset to
  // rounding, but keep the numeric path so odd inputs are still handled
  double integral = 0.0;
  double minval = eval_unnormalized(0.0);
  const double h = 1.0 / kGrid;
  double prev = minval;
  for (int i = 1; i <= kGrid; ++i) {
    const double v = eval_unnormalized(i * h);
    integral += 0.5 * (prev + v) * h;
    minval = std::min(minval, v);
    prev = v;
  }
  if (!(minval > 0.0))
    throw std::invalid_argument(
        "DensityProfile: density must be strictly positive on [0,1)");
  if (!(integral > 0.0))
    throw std::invalid_argument("DensityProfile: non-positive total mass");
  normalization_ = 1.0 / integral;
  min_density_ = minval * normalization_;
}

double DensityProfile::eval(double t) const {
  return normalization_ * eval_unnormalized(t);
}

double DensityProfile::deriv(double t) const {
  double v = 0.0;
  for (const auto& h : terms_) {
    const double w = kTwoPi * h.frequency;
    v += w * (-h.cos_amp * std::sin(w * t) + h.sin_amp * std::cos(w * t));
  }
  return normalization_ * v;
}

double DensityProfile::cdf(double t) const {
  double v = offset_ * t;
  for (const auto& h : terms_) {
    const double w = kTwoPi * h.frequency;
    v += (h.cos_amp * std::sin(w * t) + h.sin_amp * (1.0 - std::cos(w * t))) / w;
  }
  return normalization_ * v;
}

DensityProfile DensityProfile::preset(const std::string& name) {
  if (name == "uniform") return DensityProfile({}, 1.0);
  if (name == "sine_well") return DensityProfile({{1, 0.0, -0.95}}, 1.0);
  if (name == "deep_well") return DensityProfile({{1, 0.0, -0.98}}, 1.0);
  throw std::invalid_argument("unknown density preset: " + name);
}

// --------------------------------------------------------------------------
// TestFunction

TestFunction::TestFunction(std::vector<SinusoidTerm> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty())
    throw std::invalid_argument("TestFunction: need at least one term");
}

TestFunction TestFunction::preset_default() {
  // sin(2 pi t) + 0.5 cos(6 pi t); cos written as phase-shifted sine
  return TestFunction({{1, 1.0, 0.0}, {3, 0.5, 1.5707963267948966}});
}

double TestFunction::eval(double t) const {
  double v = 0.0;
  for (const auto& s : terms_)
    v += s.amplitude * std::sin(kTwoPi * s.frequency * t + s.phase);
  return v;
}

double TestFunction::d1(double t) const {
  double v = 0.0;
  for (const auto& s : terms_) {
    const double w = kTwoPi * s.frequency;
    v += s.amplitude * w * std::cos(w * t + s.phase);
  }
  return v;
}

double TestFunction::d2(double t) const {
  double v = 0.0;
  for (const auto& s : terms_) {
    const double w = kTwoPi * s.frequency;
    v -= s.amplitude * w * w * std::sin(w * t + s.phase);
  }
  return v;
}

// --------------------------------------------------------------------------
// ManifoldDataset

Generator generator_from_name(const std::string& name) {
  if (name == "circle_r2") return Generator::circle_r2;
  if (name == "curve_r4") return Generator::curve_r4;
  throw std::invalid_argument("unknown generator: " + name);
}

std::string generator_name(Generator g) {
  return g == Generator::circle_r2 ? "circle_r2" : "curve_r4";
}

namespace {

// fixed closed curve in R^4 before reparametrization; the (cos, sin) pair in
// the first two coordinates keeps it embedded (no self-intersections)
void curve_raw(double u, double* out) {
  const double th = kTwoPi * u;
  out[0] = std::cos(th);
  out[1] = std::sin(th);
  out[2] = 0.25 * std::cos(2.0 * th) + 0.10 * std::sin(3.0 * th);
  out[3] = 0.25 * std::sin(2.0 * th) - 0.10 * std::cos(3.0 * th);
}

double curve_raw_speed(double u) {
  const double th = kTwoPi * u;
  const double d2 = -0.50 * std::sin(2.0 * th) + 0.30 * std::cos(3.0 * th);
  const double d3 = 0.50 * std::cos(2.0 * th) + 0.30 * std::sin(3.0 * th);
  return kTwoPi * std::sqrt(1.0 + d2 * d2 + d3 * d3);
}

}  // namespace

ManifoldDataset::ManifoldDataset(Generator gen, DensityProfile density)
    : generator_(gen), density_(std::move(density)) {
  if (generator_ == Generator::circle_r2) {
    ambient_dim_ = 2;
  } else {
    ambient_dim_ = 4;
    build_arclength_tables();
  }
}

void ManifoldDataset::build_arclength_tables() {
  arc_s_.assign(kGrid + 1, 0.0);
  const double h = 1.0 / kGrid;
  double acc = 0.0;
  double prev = curve_raw_speed(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double sp = curve_raw_speed(i * h);
    acc += 0.5 * (prev + sp) * h;
    arc_s_[i] = acc;
    prev = sp;
  }
  total_length_ = acc;
  for (auto& s : arc_s_) s /= total_length_;
  arc_s_.front() = 0.0;
  arc_s_.back() = 1.0;
}

double ManifoldDataset::raw_param_for(double t) const {
  return pwl_invert(arc_s_, wrap01(t));
}

Eigen::RowVectorXd ManifoldDataset::embed(double t) const {
  if (generator_ == Generator::circle_r2) {
    const double r = 1.0 / kTwoPi;  // circumference exactly 1
    Eigen::RowVectorXd x(2);
    x << r * std::cos(kTwoPi * t), r * std::sin(kTwoPi * t);
    return x;
  }
  const double u = raw_param_for(t);
  double raw[4];
  curve_raw(u, raw);
  Eigen::RowVectorXd x(4);
  for (int c = 0; c < 4; ++c) x[c] = raw[c] / total_length_;
  return x;
}

PointCloud ManifoldDataset::sample(Index n, std::uint64_t seed) const {
  if (n <= 0) throw std::invalid_argument("sample: need n > 0");

  // tabulate the analytic CDF once, then invert piecewise linearly
  std::vector<double> cdf_grid(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i)
    cdf_grid[i] = density_.cdf(static_cast<double>(i) / kGrid);
  cdf_grid.front() = 0.0;
  cdf_grid.back() = 1.0;

  Rng rng(seed);
  PointCloud cloud;
  cloud.coords.resize(n, ambient_dim_);
  Vec param(n);
  for (Index i = 0; i < n; ++i) {
    const double t = pwl_invert(cdf_grid, rng.uniform());
    param[i] = t;
    cloud.coords.row(i) = embed(t);
  }
  cloud.param = std::move(param);
  return cloud;
}

double ManifoldDataset::eval_barrho(double t) const {
  return std::pow(density_.eval(t), -1.0 / intrinsic_dim());
}

double ManifoldDataset::eval_weighted_laplacian(const TestFunction& f, double t,
                                                double alpha) const {
  const double drift = 1.0 + 2.0 * (alpha - 1.0) / intrinsic_dim();
  const double p = density_.eval(t);
  return f.d2(t) + drift * (density_.deriv(t) / p) * f.d1(t);
}

double ManifoldDataset::eval_density_weight(double t, double alpha) const {
  const double expo = 1.0 + 2.0 * (alpha - 1.0) / intrinsic_dim();
  return std::pow(density_.eval(t), expo);
}

double ManifoldDataset::dirichlet_energy(const TestFunction& f,
                                         double alpha) const {
  // rectangle rule; integrand is smooth periodic so this is spectrally exact
  double acc = 0.0;
  const double h = 1.0 / kGrid;
  for (int i = 0; i < kGrid; ++i) {
    const double t = i * h;
    const double fp = f.d1(t);
    acc += eval_density_weight(t, alpha) * fp * fp;
  }
  return acc * h;
}

ManifoldDataset make_dataset(const std::string& generator,
                             const DensityProfile& density) {
  return ManifoldDataset(generator_from_name(generator), density);
}

}  // namespace selftune
