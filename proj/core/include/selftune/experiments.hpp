#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selftune/bandwidth.hpp"
#include "selftune/kernels.hpp"
#include "selftune/laplacian.hpp"
#include "selftune/manifold.hpp"
#include "selftune/spectral.hpp"

namespace selftune {

// ---------------------------------------------------------------------------
// Experiment harness: each runner draws `repeats` Monte-Carlo replicates with
// per-repeat seeds seed+0 .. seed+repeats-1, aggregates by pairwise summation
// (order-independent), and reports mean plus standard error per grid point.
// ---------------------------------------------------------------------------

enum class Experiment {
  bandwidth_profile,   // per-location error of rho-hat vs KDE across k_y grid
  bandwidth_rate,      // sup-error decay along an N_y grid, with slope fit
  dirichlet_sweep,     // E_N relative error across the eps grid
  pointwise_sweep,     // Err_1 / Err_inf of L_un and L_rw' across eps
  standalone_y_study,  // bandwidths from X vs growing Y vs exact bar-rho
  embedding,           // spectral embedding of a synthetic dataset
  external_embedding,  // spectral embedding of a CSV point cloud
};

Experiment experiment_from_name(const std::string& name);
std::string experiment_name(Experiment e);

// geometric grid lo..hi with `steps` points (log-uniform)
struct GeometricGrid {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;
  std::vector<double> values() const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::dirichlet_sweep;

  // data source
  std::string generator = "circle_r2";
  std::string density = "sine_well";
  std::string input_csv;                 // external_embedding only
  std::vector<SinusoidTerm> f_terms;     // empty: default test function

  Index n_x = 2000;
  Index n_y = 4000;
  int k_x = 32;
  int k_y = 256;

  // kernel / operator parameters
  std::string variant = "selftuned_alpha";
  double alpha = 1.0;
  double beta = 0.5;
  double truncation_tol = 1e-12;
  std::optional<GeometricGrid> eps_grid;     // sweeps
  std::optional<GeometricGrid> sigma0_grid;  // alternative parametrization
  double eps = 1e-4;                         // single-point experiments
  double sigma0 = 0.0;                       // >0 selects the sigma0 form
  std::string kde_eps = "median";  // "median" (of R-hat, squared) or a number

  // bandwidth_profile / bandwidth_rate
  std::vector<int> ky_list;  // profile grid; empty: {k_y}
  GeometricGrid ny_grid{2000.0, 32000.0, 5};
  double ky_c = 0.0841;    // k_y(N) = round(ky_c * N^ky_exp): 37..338

  double ky_exp = 0.8;
  int locations = 500;     // fixed evaluation grid size

  // embedding
  int eigenpairs = 9;

  int repeats = 100;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 0;  // 0: hardware concurrency
};

// flat key=value config file; '#' comments. CLI overrides reuse apply_override.
ExperimentConfig load_config(const std::string& path);
void apply_override(ExperimentConfig* cfg, const std::string& key,
                    const std::string& value);
GeometricGrid parse_grid(const std::string& text);  // "lo:hi:steps"

// least-squares fit of log y against log x
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
SlopeFit loglog_slope(const std::vector<double>& x,
                      const std::vector<double>& y);

// deterministic order-independent reduction helpers
double pairwise_sum(const double* data, std::size_t n);
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& samples);

// index range [first, last] of the smallest-eps window spanning one decade
// on which the mean curve decreases monotonically; falls back to the first
// decade of the grid
std::pair<int, int> variance_window(const std::vector<double>& eps,
                                    const std::vector<double>& mean_err);

// ------------------------------------------------------------------ results

struct BandwidthProfileResult {
  std::vector<int> ky;
  std::vector<double> eps_matched;  // KDE bandwidth matched to each k_y
  std::vector<double> t_loc, p_loc;
  // [grid index][location]: mean |relative error| over repeats, plus se
  std::vector<std::vector<MeanSe>> rho_err;
  std::vector<std::vector<MeanSe>> kde_err;
};

struct BandwidthRateResult {
  std::vector<double> ny;
  std::vector<int> ky;
  std::vector<MeanSe> sup_err;  // sup over locations of |rel err|, averaged
  SlopeFit fit;
};

// one eps-grid sweep of Dirichlet-form and pointwise operator errors, with
// a paired run using the exact bar-rho bandwidth
struct ConvergenceSweepResult {
  std::vector<double> eps;
  double energy_truth = 0.0;
  std::vector<MeanSe> dirichlet_rel, dirichlet_rel_exact;
  std::vector<MeanSe> err1_un, errinf_un;        // relative Err_1 / Err_inf
  std::vector<MeanSe> err1_rw, errinf_rw;
  std::vector<MeanSe> errinf_un_exact;
  std::pair<int, int> window{0, 0};
  SlopeFit dirichlet_fit, errinf_fit;  // on the variance window
  double best_dirichlet_rel = 0.0;     // min over grid of mean rel error
  double best_errinf_rel = 0.0;
};

struct StandaloneYSeries {
  std::string name;  // "x", "y<Ny>", or "exact"
  std::vector<MeanSe> dirichlet_rel;
  std::vector<MeanSe> errinf;
};

struct StandaloneYResult {
  std::vector<double> eps;
  std::vector<StandaloneYSeries> series;
};

struct EmbeddingResult {
  PointCloud cloud;
  SpectralResult un;
  SpectralResult rw;
  double sigma0 = 0.0;
  double eps = 0.0;
};

BandwidthProfileResult run_bandwidth_profile(const ExperimentConfig& cfg);
BandwidthRateResult run_bandwidth_rate(const ExperimentConfig& cfg);
ConvergenceSweepResult run_convergence_sweep(const ExperimentConfig& cfg);
StandaloneYResult run_standalone_y_study(const ExperimentConfig& cfg);
EmbeddingResult run_embedding_once(const ExperimentConfig& cfg, double sigma0,
                                   std::uint64_t seed);

// dispatch, write CSVs + manifest.json into cfg.out_dir
void run_experiment(const ExperimentConfig& cfg);

}  // namespace selftune
