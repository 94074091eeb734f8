#include "selftune/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "selftune/csv.hpp"
#include "selftune/moments.hpp"
#include "selftune/rng.hpp"

namespace selftune {

namespace {

// ======================================================================
// small utilities
// ======================================================================

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw std::runtime_error("config: bad number for " + what + ": '" + text +
                             "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size())
    throw std::runtime_error("config: bad integer for " + what + ": '" + text +
                             "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void parallel_for(int n_items, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc > 0 ? static_cast<int>(hc) : 1;
  }
  threads = std::min(threads, n_items);
  if (threads <= 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double median_of(Vec v) {
  std::sort(v.data(), v.data() + v.size());
  const Index n = v.size();
  if (n == 0) throw std::invalid_argument("median of empty vector");
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

// ======================================================================
// names, grids, aggregation
// ======================================================================

Experiment experiment_from_name(const std::string& name) {
  if (name == "bandwidth_profile") return Experiment::bandwidth_profile;
  if (name == "bandwidth_rate") return Experiment::bandwidth_rate;
  if (name == "dirichlet_sweep") return Experiment::dirichlet_sweep;
  if (name == "pointwise_sweep") return Experiment::pointwise_sweep;
  if (name == "standalone_y_study") return Experiment::standalone_y_study;
  if (name == "embedding") return Experiment::embedding;
  if (name == "external_embedding") return Experiment::external_embedding;
  throw std::runtime_error("config: unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::bandwidth_profile: return "bandwidth_profile";
    case Experiment::bandwidth_rate: return "bandwidth_rate";
    case Experiment::dirichlet_sweep: return "dirichlet_sweep";
    case Experiment::pointwise_sweep: return "pointwise_sweep";
    case Experiment::standalone_y_study: return "standalone_y_study";
    case Experiment::embedding: return "embedding";
    case Experiment::external_embedding: return "external_embedding";
  }
  throw std::logic_error("unreachable experiment");
}

std::vector<double> GeometricGrid::values() const {
  if (!(lo > 0.0) || !(hi > 0.0) || hi < lo || steps < 1)
    throw std::runtime_error("config: bad geometric grid");
  std::vector<double> out;
  out.reserve(steps);
  if (steps == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < steps; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (steps - 1)));
  return out;
}

GeometricGrid parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw std::runtime_error("config: grid must be lo:hi:steps, got '" + text +
                             "'");
  GeometricGrid g;
  g.lo = parse_number(parts[0], "grid lo");
  g.hi = parse_number(parts[1], "grid hi");
  g.steps = static_cast<int>(parse_u64(parts[2], "grid steps"));
  g.values();  // validate now
  return g;
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

MeanSe mean_se(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_se: empty sample");
  MeanSe out;
  const std::size_t n = samples.size();
  out.mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  if (n == 1) return out;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = samples[i] - out.mean;
    sq[i] = d * d;
  }
  const double var =
      pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
  out.se = std::sqrt(var / static_cast<double>(n));
  return out;
}

SlopeFit loglog_slope(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 paired points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("loglog_slope: inputs must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_sum(lx.data(), n) / n;
  const double my = pairwise_sum(ly.data(), n) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("loglog_slope: degenerate abscissa");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

std::pair<int, int> variance_window(const std::vector<double>& eps,
                                    const std::vector<double>& mean_err) {
  if (eps.size() != mean_err.size() || eps.size() < 2)
    throw std::invalid_argument("variance_window: bad inputs");
  const int n = static_cast<int>(eps.size());
  auto decade_end = [&](int s) {
    for (int e = s + 1; e < n; ++e)
      if (eps[e] >= 10.0 * eps[s] * (1.0 - 1e-9)) return e;
    return -1;
  };
  for (int s = 0; s < n; ++s) {
    const int e = decade_end(s);
    if (e < 0) break;
    bool decreasing = true;
    for (int i = s; i < e; ++i)
      if (!(mean_err[i] > mean_err[i + 1])) {
        decreasing = false;
        break;
      }
    if (decreasing) return {s, e};
  }
  int e0 = decade_end(0);
  if (e0 < 0) e0 = n - 1;
  return {0, e0};
}

// ======================================================================
// configuration
// ======================================================================

void apply_override(ExperimentConfig* cfg, const std::string& key,
                    const std::string& value) {
  if (key == "experiment") {
    cfg->experiment = experiment_from_name(value);
  } else if (key == "generator") {
    generator_from_name(value);  // validate
    cfg->generator = value;
  } else if (key == "density") {
    DensityProfile::preset(value);  // validate
    cfg->density = value;
  } else if (key == "input_csv") {
    cfg->input_csv = value;
  } else if (key == "f_terms") {
    std::vector<SinusoidTerm> terms;
    for (const auto& part : split(value, ',')) {
      const auto fields = split(part, ':');
      if (fields.size() != 3)
        throw std::runtime_error(
            "config: f_terms entries must be freq:amp:phase");
      SinusoidTerm s;
      s.frequency = static_cast<int>(parse_u64(fields[0], "f_terms freq"));
      s.amplitude = parse_number(fields[1], "f_terms amp");
      s.phase = parse_number(fields[2], "f_terms phase");
      terms.push_back(s);
    }
    cfg->f_terms = std::move(terms);
  } else if (key == "n_x") {
    cfg->n_x = static_cast<Index>(parse_u64(value, key));
  } else if (key == "n_y") {
    cfg->n_y = static_cast<Index>(parse_u64(value, key));
  } else if (key == "k_x") {
    cfg->k_x = static_cast<int>(parse_u64(value, key));
  } else if (key == "k_y") {
    cfg->k_y = static_cast<int>(parse_u64(value, key));
  } else if (key == "variant") {
    kernel_variant_from_name(value);  // validate
    cfg->variant = value;
  } else if (key == "alpha") {
    cfg->alpha = parse_number(value, key);
  } else if (key == "beta") {
    cfg->beta = parse_number(value, key);
  } else if (key == "truncation_tol") {
    cfg->truncation_tol = parse_number(value, key);
  } else if (key == "eps") {
    cfg->eps = parse_number(value, key);
  } else if (key == "eps_grid") {
    cfg->eps_grid = parse_grid(value);
  } else if (key == "sigma0") {
    cfg->sigma0 = parse_number(value, key);
  } else if (key == "sigma0_grid") {
    cfg->sigma0_grid = parse_grid(value);
  } else if (key == "kde_eps") {
    if (value != "median") parse_number(value, key);  // validate
    cfg->kde_eps = value;
  } else if (key == "ky_list") {
    std::vector<int> list;
    for (const auto& part : split(value, ','))
      list.push_back(static_cast<int>(parse_u64(trim(part), "ky_list")));
    cfg->ky_list = std::move(list);
  } else if (key == "ny_grid") {
    cfg->ny_grid = parse_grid(value);
  } else if (key == "ky_c") {
    cfg->ky_c = parse_number(value, key);
  } else if (key == "ky_exp") {
    cfg->ky_exp = parse_number(value, key);
  } else if (key == "locations") {
    cfg->locations = static_cast<int>(parse_u64(value, key));
  } else if (key == "eigenpairs") {
    cfg->eigenpairs = static_cast<int>(parse_u64(value, key));
  } else if (key == "repeats") {
    cfg->repeats = static_cast<int>(parse_u64(value, key));
  } else if (key == "seed") {
    cfg->seed = parse_u64(value, key);
  } else if (key == "out_dir") {
    cfg->out_dir = value;
  } else if (key == "threads") {
    cfg->threads = static_cast<int>(parse_u64(value, key));
  } else {
    throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at " + path +
                               ":" + std::to_string(lineno));
    apply_override(&cfg, trim(stripped.substr(0, eq)),
                   trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

// ======================================================================
// shared experiment plumbing
// ======================================================================

namespace {

TestFunction config_test_function(const ExperimentConfig& cfg) {
  return cfg.f_terms.empty() ? TestFunction::preset_default()
                             : TestFunction(cfg.f_terms);
}

ManifoldDataset config_dataset(const ExperimentConfig& cfg) {
  return make_dataset(cfg.generator, DensityProfile::preset(cfg.density));
}

// evaluation locations: fixed uniform grid in the intrinsic coordinate
struct Locations {
  Vec t;
  Mat coords;
  Vec p, barrho;
};

Locations make_locations(const ManifoldDataset& ds, int count) {
  if (count < 2) throw std::runtime_error("config: locations must be >= 2");
  Locations loc;
  loc.t.resize(count);
  loc.coords.resize(count, ds.ambient_dim());
  loc.p.resize(count);
  loc.barrho.resize(count);
  for (int i = 0; i < count; ++i) {
    const double t = (i + 0.5) / static_cast<double>(count);
    loc.t[i] = t;
    loc.coords.row(i) = ds.embed(t);
    loc.p[i] = ds.eval_density(t);
    loc.barrho[i] = ds.eval_barrho(t);
  }
  return loc;
}

// sub-stream seeds for one repeat: X and Y draws must be independent
std::uint64_t repeat_seed(const ExperimentConfig& cfg, int repeat,
                          std::uint64_t stream) {
  return mix_seed(cfg.seed + static_cast<std::uint64_t>(repeat), stream);
}

std::vector<MeanSe> aggregate_rows(const std::vector<std::vector<double>>& slots,
                                   std::size_t width) {
  // slots: [repeat][grid]; returns per-grid mean and standard error
  std::vector<MeanSe> out(width);
  std::vector<double> column(slots.size());
  for (std::size_t g = 0; g < width; ++g) {
    for (std::size_t r = 0; r < slots.size(); ++r) column[r] = slots[r][g];
    out[g] = mean_se(column);
  }
  return out;
}

double resolve_kde_eps(const std::string& kde_eps, const Vec& knn_dist) {
  if (kde_eps == "median") {
    const double med = median_of(knn_dist);
    if (!(med > 0.0))
      throw std::runtime_error("data: degenerate bandwidths for kde");
    return med * med;
  }
  return parse_number(kde_eps, "kde_eps");
}

}  // namespace

// ======================================================================
// bandwidth_profile: per-location estimation error of rho-hat vs the KDE
// ======================================================================

BandwidthProfileResult run_bandwidth_profile(const ExperimentConfig& cfg) {
  const ManifoldDataset ds = config_dataset(cfg);
  const Locations loc = make_locations(ds, cfg.locations);
  const int d = ds.intrinsic_dim();
  const double m0 = unit_ball_volume(d);

  BandwidthProfileResult res;
  res.ky = cfg.ky_list.empty() ? std::vector<int>{cfg.k_y} : cfg.ky_list;
  for (int ky : res.ky) {
    if (ky < 2 || ky >= cfg.n_y)
      throw std::runtime_error("config: need 1 < k_y < n_y");
    // KDE bandwidth matched to the kNN resolution: sqrt(eps) = (k/(m0 N))^(1/d)
    res.eps_matched.push_back(
        std::pow(static_cast<double>(ky) / (m0 * cfg.n_y), 2.0 / d));
  }
  res.t_loc = std::vector<double>(loc.t.data(), loc.t.data() + loc.t.size());
  res.p_loc = std::vector<double>(loc.p.data(), loc.p.data() + loc.p.size());

  const int kmax = *std::max_element(res.ky.begin(), res.ky.end());
  const std::size_t grid_n = res.ky.size();
  const std::size_t loc_n = static_cast<std::size_t>(cfg.locations);

  // [repeat][grid*loc] flattened
  std::vector<std::vector<double>> rho_slots(cfg.repeats),
      kde_slots(cfg.repeats);
  parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    const PointCloud y = ds.sample(cfg.n_y, repeat_seed(cfg, r, 1));
    const SpatialIndex index(y.coords);
    const Mat dist = knn_distances(index, loc.coords, kmax, false);
    auto& rho_out = rho_slots[r];
    auto& kde_out = kde_slots[r];
    rho_out.resize(grid_n * loc_n);
    kde_out.resize(grid_n * loc_n);
    for (std::size_t g = 0; g < grid_n; ++g) {
      const int ky = res.ky[g];
      const Vec rho =
          normalize_bandwidth(dist.col(ky - 1), ky, cfg.n_y, d, m0);
      const Vec p_hat =
          kde_density(index, loc.coords, res.eps_matched[g], d);
      for (std::size_t l = 0; l < loc_n; ++l) {
        rho_out[g * loc_n + l] =
            std::abs(rho[l] - loc.barrho[l]) / loc.barrho[l];
        kde_out[g * loc_n + l] = std::abs(p_hat[l] - loc.p[l]) / loc.p[l];
      }
    }
  });

  res.rho_err.resize(grid_n);
  res.kde_err.resize(grid_n);
  const auto rho_agg = aggregate_rows(rho_slots, grid_n * loc_n);
  const auto kde_agg = aggregate_rows(kde_slots, grid_n * loc_n);
  for (std::size_t g = 0; g < grid_n; ++g) {
    res.rho_err[g].assign(rho_agg.begin() + g * loc_n,
                          rho_agg.begin() + (g + 1) * loc_n);
    res.kde_err[g].assign(kde_agg.begin() + g * loc_n,
                          kde_agg.begin() + (g + 1) * loc_n);
  }
  return res;
}

// ======================================================================
// bandwidth_rate: sup-error along the N_y grid with a log-log fit
// ======================================================================

BandwidthRateResult run_bandwidth_rate(const ExperimentConfig& cfg) {
  const ManifoldDataset ds = config_dataset(cfg);
  const Locations loc = make_locations(ds, cfg.locations);
  const int d = ds.intrinsic_dim();
  const double m0 = unit_ball_volume(d);

  BandwidthRateResult res;
  for (double ny_val : cfg.ny_grid.values()) {
    const Index ny = static_cast<Index>(std::llround(ny_val));
    const int ky = std::max(
        2, static_cast<int>(std::llround(cfg.ky_c * std::pow(ny, cfg.ky_exp))));
    if (ky >= ny) throw std::runtime_error("config: k_y rule exceeds n_y");
    res.ny.push_back(static_cast<double>(ny));
    res.ky.push_back(ky);
  }
  if (res.ny.size() < 3)
    throw std::runtime_error("config: rate fit needs >= 3 grid points");

  const std::size_t grid_n = res.ny.size();
  std::vector<std::vector<double>> slots(cfg.repeats);
  parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    auto& out = slots[r];
    out.resize(grid_n);
    for (std::size_t g = 0; g < grid_n; ++g) {
      const Index ny = static_cast<Index>(res.ny[g]);
      const int ky = res.ky[g];
      const PointCloud y =
          ds.sample(ny, repeat_seed(cfg, r, 100 + static_cast<int>(g)));
      const SpatialIndex index(y.coords);
      const Mat dist = knn_distances(index, loc.coords, ky, false);
      const Vec rho = normalize_bandwidth(dist.col(ky - 1), ky, ny, d, m0);
      double sup = 0.0;
      for (Index l = 0; l < rho.size(); ++l)
        sup = std::max(sup,
                       std::abs(rho[l] - loc.barrho[l]) / loc.barrho[l]);
      out[g] = sup;
    }
  });

  res.sup_err = aggregate_rows(slots, grid_n);
  std::vector<double> means(grid_n);
  for (std::size_t g = 0; g < grid_n; ++g) means[g] = res.sup_err[g].mean;
  res.fit = loglog_slope(res.ny, means);
  return res;
}

// ======================================================================
// convergence sweep: Dirichlet form + pointwise operators over the eps grid
// ======================================================================

namespace {

std::vector<double> resolve_eps_grid(const ExperimentConfig& cfg, int k_bw,
                                     Index n_bw, int d, double m0) {
  if (cfg.eps_grid && cfg.sigma0_grid)
    throw std::runtime_error("config: give eps_grid or sigma0_grid, not both");
  if (cfg.sigma0_grid) {
    // eps = sigma0^2 (k/(m0 N))^(2/d): the two parametrizations coincide
    const double conv =
        std::pow(static_cast<double>(k_bw) / (m0 * n_bw), 2.0 / d);
    std::vector<double> eps;
    for (double s0 : cfg.sigma0_grid->values()) eps.push_back(s0 * s0 * conv);
    return eps;
  }
  if (cfg.eps_grid) return cfg.eps_grid->values();
  return GeometricGrid{1e-5, 1e-2, 13}.values();
}

struct SweepSlots {
  std::vector<double> dirichlet, dirichlet_exact;
  std::vector<double> err1_un, errinf_un, err1_rw, errinf_rw, errinf_un_exact;
  void resize(std::size_t n) {
    dirichlet.resize(n);
    dirichlet_exact.resize(n);
    err1_un.resize(n);
    errinf_un.resize(n);
    err1_rw.resize(n);
    errinf_rw.resize(n);
    errinf_un_exact.resize(n);
  }
};

}  // namespace

ConvergenceSweepResult run_convergence_sweep(const ExperimentConfig& cfg) {
  const ManifoldDataset ds = config_dataset(cfg);
  const TestFunction f = config_test_function(cfg);
  const int d = ds.intrinsic_dim();
  const double m0_ball = unit_ball_volume(d);
  if (cfg.k_y < 2 || cfg.k_y >= cfg.n_y)
    throw std::runtime_error("config: need 1 < k_y < n_y");

  ConvergenceSweepResult res;
  res.eps = resolve_eps_grid(cfg, cfg.k_y, cfg.n_y, d, m0_ball);
  res.energy_truth = ds.dirichlet_energy(f, cfg.alpha);
  if (!(res.energy_truth > 0.0))
    throw std::runtime_error("data: test function has zero Dirichlet energy");
  const std::size_t grid_n = res.eps.size();
  const double density_expo = 2.0 * (cfg.alpha - 1.0) / d;

  std::vector<SweepSlots> slots(cfg.repeats);
  parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    SweepSlots& out = slots[r];
    out.resize(grid_n);

    const PointCloud x = ds.sample(cfg.n_x, repeat_seed(cfg, r, 0));
    const PointCloud y = ds.sample(cfg.n_y, repeat_seed(cfg, r, 1));
    const SpatialIndex yindex(y.coords);
    BandwidthField bw =
        bandwidth_field(yindex, x.coords, cfg.k_y, d, false, m0_ball);

    // paired run with the population bandwidth bar-rho
    BandwidthField bw_exact = bw;
    const Vec& t = *x.param;
    for (Index i = 0; i < cfg.n_x; ++i)
      bw_exact.rho_hat[i] = ds.eval_barrho(t[i]);
    bw_exact.knn_dist =
        bw_exact.rho_hat *
        std::pow(static_cast<double>(cfg.k_y) / (m0_ball * cfg.n_y), 1.0 / d);

    Vec fx(cfg.n_x), truth_un(cfg.n_x), truth_rw(cfg.n_x);
    for (Index i = 0; i < cfg.n_x; ++i) {
      fx[i] = f.eval(t[i]);
      const double lim = ds.eval_weighted_laplacian(f, t[i], cfg.alpha);
      truth_rw[i] = lim;
      truth_un[i] = std::pow(ds.eval_density(t[i]), density_expo) * lim;
    }

    KernelSpec spec;
    spec.variant = KernelVariant::selftuned_alpha;
    spec.alpha = cfg.alpha;
    spec.truncation_tol = cfg.truncation_tol;
    for (std::size_t g = 0; g < grid_n; ++g) {
      spec.eps = res.eps[g];
      const OperatorConfig op = operator_config(res.eps[g], cfg.alpha, d);
      {
        const AffinityMatrix W = build_selftuned(x.coords, bw, spec);
        out.dirichlet[g] = std::abs(dirichlet_form(W, fx, op) -
                                    res.energy_truth) /
                           res.energy_truth;
        const ErrorMetrics eun = error_metrics(apply_L_un(W, fx, op), truth_un);
        out.err1_un[g] = eun.rel1;
        out.errinf_un[g] = eun.rel_inf;
        const ErrorMetrics erw =
            error_metrics(apply_L_rw_prime(W, bw, fx, op), truth_rw);
        out.err1_rw[g] = erw.rel1;
        out.errinf_rw[g] = erw.rel_inf;
      }
      {
        const AffinityMatrix W = build_selftuned(x.coords, bw_exact, spec);
        out.dirichlet_exact[g] = std::abs(dirichlet_form(W, fx, op) -
                                          res.energy_truth) /
                                 res.energy_truth;
        const ErrorMetrics eun =
            error_metrics(apply_L_un(W, fx, op), truth_un);
        out.errinf_un_exact[g] = eun.rel_inf;
      }
    }
  });

  auto collect = [&](std::vector<double> SweepSlots::*member) {
    std::vector<std::vector<double>> rows(cfg.repeats);
    for (int r = 0; r < cfg.repeats; ++r) rows[r] = slots[r].*member;
    return aggregate_rows(rows, grid_n);
  };
  res.dirichlet_rel = collect(&SweepSlots::dirichlet);
  res.dirichlet_rel_exact = collect(&SweepSlots::dirichlet_exact);
  res.err1_un = collect(&SweepSlots::err1_un);
  res.errinf_un = collect(&SweepSlots::errinf_un);
  res.err1_rw = collect(&SweepSlots::err1_rw);
  res.errinf_rw = collect(&SweepSlots::errinf_rw);
  res.errinf_un_exact = collect(&SweepSlots::errinf_un_exact);

  std::vector<double> errinf_means(grid_n), dir_means(grid_n);
  for (std::size_t g = 0; g < grid_n; ++g) {
    errinf_means[g] = res.errinf_un[g].mean;
    dir_means[g] = res.dirichlet_rel[g].mean;
  }
  res.window = variance_window(res.eps, errinf_means);
  const auto sub = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + res.window.first,
                               v.begin() + res.window.second + 1);
  };
  res.errinf_fit = loglog_slope(sub(res.eps), sub(errinf_means));
  res.dirichlet_fit = loglog_slope(sub(res.eps), sub(dir_means));
  res.best_dirichlet_rel =
      *std::min_element(dir_means.begin(), dir_means.end());
  res.best_errinf_rel =
      *std::min_element(errinf_means.begin(), errinf_means.end());
  return res;
}

// ======================================================================
// standalone_y_study: bandwidths from X itself vs growing Y vs exact
// ======================================================================

StandaloneYResult run_standalone_y_study(const ExperimentConfig& cfg) {
  const ManifoldDataset ds = config_dataset(cfg);
  const TestFunction f = config_test_function(cfg);
  const int d = ds.intrinsic_dim();
  const double m0_ball = unit_ball_volume(d);

  StandaloneYResult res;
  res.eps = resolve_eps_grid(cfg, cfg.k_x, cfg.n_x, d, m0_ball);
  const std::size_t grid_n = res.eps.size();
  const double energy_truth = ds.dirichlet_energy(f, cfg.alpha);
  const double density_expo = 2.0 * (cfg.alpha - 1.0) / d;

  struct SeriesDef {
    std::string name;
    Index ny;  // 0: from X; -1: exact
    int ky;
  };
  std::vector<SeriesDef> defs;
  defs.push_back({"x", 0, cfg.k_x});
  for (double ny_val : cfg.ny_grid.values()) {
    const Index ny = static_cast<Index>(std::llround(ny_val));
    const int ky = std::max(
        2, static_cast<int>(std::llround(cfg.ky_c * std::pow(ny, cfg.ky_exp))));
    defs.push_back({"y" + std::to_string(ny), ny, ky});
  }
  defs.push_back({"exact", -1, 0});

  const std::size_t n_series = defs.size();
  // [repeat][series*grid] for both metrics
  std::vector<std::vector<double>> dir_slots(cfg.repeats),
      inf_slots(cfg.repeats);
  parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    auto& dir_out = dir_slots[r];
    auto& inf_out = inf_slots[r];
    dir_out.resize(n_series * grid_n);
    inf_out.resize(n_series * grid_n);

    const PointCloud x = ds.sample(cfg.n_x, repeat_seed(cfg, r, 0));
    const SpatialIndex xindex(x.coords);
    const Vec& t = *x.param;
    Vec fx(cfg.n_x), truth_un(cfg.n_x);
    for (Index i = 0; i < cfg.n_x; ++i) {
      fx[i] = f.eval(t[i]);
      truth_un[i] = std::pow(ds.eval_density(t[i]), density_expo) *
                    ds.eval_weighted_laplacian(f, t[i], cfg.alpha);
    }

    for (std::size_t s = 0; s < n_series; ++s) {
      BandwidthField bw;
      if (defs[s].ny == 0) {
        bw = bandwidth_field(xindex, x.coords, defs[s].ky, d, true, m0_ball);
      } else if (defs[s].ny < 0) {
        bw.k = cfg.k_x;
        bw.n_ref = cfg.n_x;
        bw.d = d;
        bw.m0 = m0_ball;
        bw.rho_hat.resize(cfg.n_x);
        for (Index i = 0; i < cfg.n_x; ++i)
          bw.rho_hat[i] = ds.eval_barrho(t[i]);
        bw.knn_dist = bw.rho_hat * std::pow(static_cast<double>(cfg.k_x) /
                                                (m0_ball * cfg.n_x),
                                            1.0 / d);
      } else {
        const PointCloud y =
            ds.sample(defs[s].ny, repeat_seed(cfg, r, 200 + s));
        const SpatialIndex yindex(y.coords);
        bw = bandwidth_field(yindex, x.coords, defs[s].ky, d, false, m0_ball);
      }

      KernelSpec spec;
      spec.variant = KernelVariant::selftuned_alpha;
      spec.alpha = cfg.alpha;
      spec.truncation_tol = cfg.truncation_tol;
      for (std::size_t g = 0; g < grid_n; ++g) {
        spec.eps = res.eps[g];
        const OperatorConfig op = operator_config(res.eps[g], cfg.alpha, d);
        const AffinityMatrix W = build_selftuned(x.coords, bw, spec);
        dir_out[s * grid_n + g] =
            std::abs(dirichlet_form(W, fx, op) - energy_truth) / energy_truth;
        inf_out[s * grid_n + g] =
            error_metrics(apply_L_un(W, fx, op), truth_un).rel_inf;
      }
    }
  });

  const auto dir_agg = aggregate_rows(dir_slots, n_series * grid_n);
  const auto inf_agg = aggregate_rows(inf_slots, n_series * grid_n);
  for (std::size_t s = 0; s < n_series; ++s) {
    StandaloneYSeries series;
    series.name = defs[s].name;
    series.dirichlet_rel.assign(dir_agg.begin() + s * grid_n,
                                dir_agg.begin() + (s + 1) * grid_n);
    series.errinf.assign(inf_agg.begin() + s * grid_n,
                         inf_agg.begin() + (s + 1) * grid_n);
    res.series.push_back(std::move(series));
  }
  return res;
}

// ======================================================================
// embedding: spectral decomposition of one kernel build
// ======================================================================

EmbeddingResult run_embedding_once(const ExperimentConfig& cfg, double sigma0,
                                   std::uint64_t seed) {
  EmbeddingResult res;
  int d = 1;
  if (cfg.experiment == Experiment::external_embedding) {
    if (cfg.input_csv.empty())
      throw std::runtime_error("config: external_embedding needs input_csv");
    res.cloud = load_csv_dataset(cfg.input_csv);
  } else {
    const ManifoldDataset ds = config_dataset(cfg);
    res.cloud = ds.sample(cfg.n_x, mix_seed(seed, 0));
    d = ds.intrinsic_dim();
  }
  const Index n = res.cloud.size();
  if (cfg.k_x < 2 || cfg.k_x >= n)
    throw std::runtime_error("config: need 1 < k_x < N");

  const SpatialIndex index(res.cloud.coords);
  const BandwidthField bw =
      bandwidth_field(index, res.cloud.coords, cfg.k_x, d, true);

  KernelSpec spec;
  spec.variant = kernel_variant_from_name(cfg.variant);
  spec.alpha = cfg.alpha;
  spec.beta = cfg.beta;
  spec.truncation_tol = cfg.truncation_tol;
  res.sigma0 = sigma0;

  AffinityMatrix W;
  const bool sigma_form = sigma0 > 0.0;
  // the sigma0 form matches the eps form at eps = sigma0^2 (k/(m0 N))^(2/d)
  const double eps_equiv =
      sigma0 * sigma0 *
      std::pow(static_cast<double>(cfg.k_x) / (bw.m0 * static_cast<double>(n)),
               2.0 / d);
  switch (spec.variant) {
    case KernelVariant::selftuned_alpha: {
      if (sigma_form)
        spec.sigma0 = sigma0;
      else
        spec.eps = cfg.eps;
      W = build_selftuned(res.cloud.coords, bw, spec);
      break;
    }
    case KernelVariant::fixed_beta: {
      spec.eps = sigma_form ? eps_equiv : cfg.eps;
      Vec p_hat;
      if (spec.beta != 0.0) {
        const double eps_kde = resolve_kde_eps(cfg.kde_eps, bw.knn_dist);
        p_hat = kde_density(index, res.cloud.coords, eps_kde, d);
      }
      W = build_fixed(res.cloud.coords, p_hat, spec);
      break;
    }
    case KernelVariant::mixed_rho_p: {
      spec.eps = sigma_form ? eps_equiv : cfg.eps;
      const double eps_kde = resolve_kde_eps(cfg.kde_eps, bw.knn_dist);
      const Vec p_hat = kde_density(index, res.cloud.coords, eps_kde, d);
      W = build_mixed(res.cloud.coords, bw, p_hat, spec);
      break;
    }
    case KernelVariant::mnist_w1:
    case KernelVariant::mnist_wprime: {
      if (!sigma_form)
        throw std::runtime_error("config: mnist variants need sigma0 > 0");
      spec.sigma0 = sigma0;
      const double eps_kde = resolve_kde_eps(cfg.kde_eps, bw.knn_dist);
      const Vec mu_hat =
          unnormalized_density(index, res.cloud.coords, eps_kde);
      MnistKernels pair =
          build_mnist_variants(res.cloud.coords, bw, mu_hat, spec);
      W = (spec.variant == KernelVariant::mnist_w1) ? std::move(pair.w1)
                                                    : std::move(pair.wprime);
      break;
    }
  }
  res.eps = spec.eps ? *spec.eps : eps_equiv;

  const int m = static_cast<int>(std::min<Index>(cfg.eigenpairs, n));
  EigOptions opts;
  opts.seed = mix_seed(seed, 7);
  res.un = eig_unnormalized(W, m, opts);
  // bandwidth diagonal: sigma0 R-hat in the sigma0 form, rho-hat otherwise
  Vec scale = sigma_form ? (sigma0 * bw.knn_dist).eval() : bw.rho_hat;
  res.rw = eig_rw_prime(W, scale, m, opts);
  return res;
}

// ======================================================================
// dispatch and file outputs
// ======================================================================

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json grid_json(const GeometricGrid& g) {
  return json{{"lo", g.lo}, {"hi", g.hi}, {"steps", g.steps}};
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["generator"] = cfg.generator;
  j["density"] = cfg.density;
  if (!cfg.input_csv.empty()) j["input_csv"] = cfg.input_csv;
  if (!cfg.f_terms.empty()) {
    json terms = json::array();
    for (const auto& s : cfg.f_terms)
      terms.push_back({{"frequency", s.frequency},
                       {"amplitude", s.amplitude},
                       {"phase", s.phase}});
    j["f_terms"] = terms;
  }
  j["n_x"] = cfg.n_x;
  j["n_y"] = cfg.n_y;
  j["k_x"] = cfg.k_x;
  j["k_y"] = cfg.k_y;
  j["variant"] = cfg.variant;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["truncation_tol"] = cfg.truncation_tol;
  j["eps"] = cfg.eps;
  if (cfg.eps_grid) j["eps_grid"] = grid_json(*cfg.eps_grid);
  j["sigma0"] = cfg.sigma0;
  if (cfg.sigma0_grid) j["sigma0_grid"] = grid_json(*cfg.sigma0_grid);
  j["kde_eps"] = cfg.kde_eps;
  if (!cfg.ky_list.empty()) j["ky_list"] = cfg.ky_list;
  j["ny_grid"] = grid_json(cfg.ny_grid);
  j["ky_c"] = cfg.ky_c;
  j["ky_exp"] = cfg.ky_exp;
  j["locations"] = cfg.locations;
  j["eigenpairs"] = cfg.eigenpairs;
  j["repeats"] = cfg.repeats;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  return j;
}

void write_manifest(const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs,
                    const json& extra) {
  json j;
  j["config"] = config_json(cfg);
  j["outputs"] = outputs;
  if (!extra.is_null()) j["results"] = extra;
  std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
  if (!out) throw std::runtime_error("io: cannot write manifest.json");
  out << j.dump(2) << "\n";
}

json fit_json(const SlopeFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

void write_spectrum_csv(const std::string& path, const SpectralResult& s) {
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < s.eigenvalues.size(); ++i)
    rows.push_back({static_cast<double>(i), s.eigenvalues[i], s.residuals[i]});
  write_csv(path, {"index", "lambda", "residual"}, rows);
}

void write_modes_csv(const std::string& path, const PointCloud& cloud,
                     const SpectralResult& s) {
  std::vector<std::string> header{"index"};
  if (cloud.param) header.push_back("t");
  if (cloud.labels) header.push_back("label");
  for (Index c = 0; c < s.eigenvectors.cols(); ++c)
    header.push_back("v" + std::to_string(c + 1));
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < cloud.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    if (cloud.param) row.push_back((*cloud.param)[i]);
    if (cloud.labels) row.push_back(static_cast<double>((*cloud.labels)[i]));
    for (Index c = 0; c < s.eigenvectors.cols(); ++c)
      row.push_back(s.eigenvectors(i, c));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void run_embedding_experiment(const ExperimentConfig& cfg) {
  std::vector<double> sigma_grid;
  if (cfg.sigma0_grid) {
    sigma_grid = cfg.sigma0_grid->values();
  } else {
    sigma_grid.push_back(cfg.sigma0);  // may be 0: eps form
  }

  std::vector<std::string> outputs;
  json results = json::array();
  for (std::size_t g = 0; g < sigma_grid.size(); ++g) {
    const EmbeddingResult res =
        run_embedding_once(cfg, sigma_grid[g], cfg.seed);
    const std::string tag =
        sigma_grid.size() > 1 ? "_g" + std::to_string(g) : "";
    const fs::path dir(cfg.out_dir);

    const std::string points = "points" + tag + ".csv";
    save_csv_dataset((dir / points).string(), res.cloud);
    const std::string spec_un = "spectrum_un" + tag + ".csv";
    write_spectrum_csv((dir / spec_un).string(), res.un);
    const std::string spec_rw = "spectrum_rw" + tag + ".csv";
    write_spectrum_csv((dir / spec_rw).string(), res.rw);
    const std::string modes_un = "modes_un" + tag + ".csv";
    write_modes_csv((dir / modes_un).string(), res.cloud, res.un);
    const std::string modes_rw = "modes_rw" + tag + ".csv";
    write_modes_csv((dir / modes_rw).string(), res.cloud, res.rw);
    outputs.insert(outputs.end(),
                   {points, spec_un, spec_rw, modes_un, modes_rw});
    results.push_back({{"sigma0", res.sigma0}, {"eps", res.eps}});
  }
  write_manifest(cfg, outputs, json{{"grid", results}});
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);

  switch (cfg.experiment) {
    case Experiment::bandwidth_profile: {
      const BandwidthProfileResult res = run_bandwidth_profile(cfg);
      std::vector<std::vector<double>> rows;
      for (std::size_t g = 0; g < res.ky.size(); ++g)
        for (std::size_t l = 0; l < res.t_loc.size(); ++l)
          rows.push_back({static_cast<double>(res.ky[g]), res.eps_matched[g],
                          res.t_loc[l], res.p_loc[l], res.rho_err[g][l].mean,
                          res.rho_err[g][l].se, res.kde_err[g][l].mean,
                          res.kde_err[g][l].se});
      write_csv((dir / "bandwidth_profile.csv").string(),
                {"ky", "eps_kde", "t", "p", "rho_mean_rel_err", "rho_se",
                 "kde_mean_rel_err", "kde_se"},
                rows);
      write_manifest(cfg, {"bandwidth_profile.csv"}, json());
      break;
    }
    case Experiment::bandwidth_rate: {
      const BandwidthRateResult res = run_bandwidth_rate(cfg);
      std::vector<std::vector<double>> rows;
      for (std::size_t g = 0; g < res.ny.size(); ++g)
        rows.push_back({res.ny[g], static_cast<double>(res.ky[g]),
                        res.sup_err[g].mean, res.sup_err[g].se});
      write_csv((dir / "bandwidth_rate.csv").string(),
                {"ny", "ky", "sup_rel_err_mean", "sup_rel_err_se"}, rows);
      write_manifest(cfg, {"bandwidth_rate.csv"},
                     json{{"fit", fit_json(res.fit)}});
      break;
    }
    case Experiment::dirichlet_sweep: {
      const ConvergenceSweepResult res = run_convergence_sweep(cfg);
      std::vector<std::vector<double>> rows;
      for (std::size_t g = 0; g < res.eps.size(); ++g)
        rows.push_back({res.eps[g], res.dirichlet_rel[g].mean,
                        res.dirichlet_rel[g].se,
                        res.dirichlet_rel_exact[g].mean,
                        res.dirichlet_rel_exact[g].se});
      write_csv((dir / "dirichlet_sweep.csv").string(),
                {"eps", "rel_err_mean", "rel_err_se", "rel_err_exact_mean",
                 "rel_err_exact_se"},
                rows);
      write_manifest(
          cfg, {"dirichlet_sweep.csv"},
          json{{"energy_truth", res.energy_truth},
               {"best_rel_err", res.best_dirichlet_rel},
               {"window", {res.window.first, res.window.second}},
               {"fit", fit_json(res.dirichlet_fit)}});
      break;
    }
    case Experiment::pointwise_sweep: {
      const ConvergenceSweepResult res = run_convergence_sweep(cfg);
      std::vector<std::vector<double>> rows;
      for (std::size_t g = 0; g < res.eps.size(); ++g)
        rows.push_back(
            {res.eps[g], res.err1_un[g].mean, res.err1_un[g].se,
             res.errinf_un[g].mean, res.errinf_un[g].se, res.err1_rw[g].mean,
             res.err1_rw[g].se, res.errinf_rw[g].mean, res.errinf_rw[g].se,
             res.errinf_un_exact[g].mean, res.errinf_un_exact[g].se});
      write_csv((dir / "pointwise_sweep.csv").string(),
                {"eps", "err1_un_mean", "err1_un_se", "errinf_un_mean",
                 "errinf_un_se", "err1_rw_mean", "err1_rw_se",
                 "errinf_rw_mean", "errinf_rw_se", "errinf_un_exact_mean",
                 "errinf_un_exact_se"},
                rows);
      write_manifest(
          cfg, {"pointwise_sweep.csv"},
          json{{"best_errinf_rel", res.best_errinf_rel},
               {"window", {res.window.first, res.window.second}},
               {"errinf_fit", fit_json(res.errinf_fit)},
               {"dirichlet_fit", fit_json(res.dirichlet_fit)}});
      break;
    }
    case Experiment::standalone_y_study: {
      const StandaloneYResult res = run_standalone_y_study(cfg);
      std::ofstream out(dir / "standalone_y.csv");
      if (!out) throw std::runtime_error("io: cannot write standalone_y.csv");
      out << "series,eps,dirichlet_rel_mean,dirichlet_rel_se,errinf_mean,"
             "errinf_se\n";
      for (const auto& s : res.series)
        for (std::size_t g = 0; g < res.eps.size(); ++g)
          out << s.name << "," << format_double(res.eps[g]) << ","
              << format_double(s.dirichlet_rel[g].mean) << ","
              << format_double(s.dirichlet_rel[g].se) << ","
              << format_double(s.errinf[g].mean) << ","
              << format_double(s.errinf[g].se) << "\n";
      write_manifest(cfg, {"standalone_y.csv"}, json());
      break;
    }
    case Experiment::embedding:
    case Experiment::external_embedding:
      run_embedding_experiment(cfg);
      break;
  }
}

}  // namespace selftune
