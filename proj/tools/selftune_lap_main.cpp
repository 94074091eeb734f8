// Command-line front end for the experiment harness. One subcommand per
// experiment plus `sample` for raw dataset export. Options mirror the
// key=value names of the config file; command-line values override it.

#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "selftune/csv.hpp"
#include "selftune/experiments.hpp"
#include "selftune/manifold.hpp"

namespace {

struct Invocation {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override_option(CLI::App* cmd, Invocation* inv, const char* flag,
                         const char* key, const char* desc) {
  cmd->add_option_function<std::string>(
      flag,
      [inv, key](const std::string& value) {
        inv->overrides.emplace_back(key, value);
      },
      desc);
}

void add_common_options(CLI::App* cmd, Invocation* inv) {
  cmd->add_option("--config", inv->config_path,
                  "key=value config file, applied before other flags");
  add_override_option(cmd, inv, "--out", "out_dir", "output directory");
  add_override_option(cmd, inv, "--seed", "seed", "base RNG seed");
  add_override_option(cmd, inv, "--repeats", "repeats",
                      "number of Monte-Carlo repeats");
  add_override_option(cmd, inv, "--generator", "generator",
                      "dataset generator (circle_r2, curve_r4)");
  add_override_option(cmd, inv, "--density", "density",
                      "density preset (uniform, sine_well, deep_well)");
  add_override_option(cmd, inv, "--f-terms", "f_terms",
                      "test function, freq:amp:phase[,...]");
  add_override_option(cmd, inv, "--nx", "n_x", "primary sample size");
  add_override_option(cmd, inv, "--ny", "n_y", "reference sample size");
  add_override_option(cmd, inv, "--k", "k_x", "kNN order on the primary set");
  add_override_option(cmd, inv, "--ky", "k_y",
                      "kNN order on the reference set");
  add_override_option(cmd, inv, "--variant", "variant", "kernel variant");
  add_override_option(cmd, inv, "--alpha", "alpha", "density exponent alpha");
  add_override_option(cmd, inv, "--beta", "beta",
                      "density exponent of the fixed-bandwidth kernel");
  add_override_option(cmd, inv, "--tol", "truncation_tol",
                      "sparse truncation threshold (0 = dense)");
  add_override_option(cmd, inv, "--eps", "eps", "kernel bandwidth eps");
  add_override_option(cmd, inv, "--eps-grid", "eps_grid",
                      "geometric eps grid lo:hi:steps");
  add_override_option(cmd, inv, "--sigma0", "sigma0",
                      "sigma0-form bandwidth (>0 selects it)");
  add_override_option(cmd, inv, "--sigma0-grid", "sigma0_grid",
                      "geometric sigma0 grid lo:hi:steps");
  add_override_option(cmd, inv, "--kde-eps", "kde_eps",
                      "KDE bandwidth: 'median' or a number");
  add_override_option(cmd, inv, "--ky-list", "ky_list",
                      "comma-separated k_y grid for bandwidth_profile");
  add_override_option(cmd, inv, "--ny-grid", "ny_grid",
                      "geometric N_y grid lo:hi:steps");
  add_override_option(cmd, inv, "--ky-c", "ky_c",
                      "coefficient of the k_y(N) growth rule");
  add_override_option(cmd, inv, "--ky-exp", "ky_exp",
                      "exponent of the k_y(N) growth rule");
  add_override_option(cmd, inv, "--locations", "locations",
                      "size of the fixed evaluation grid");
  add_override_option(cmd, inv, "--eigenpairs", "eigenpairs",
                      "number of bottom eigenpairs to compute");
  add_override_option(cmd, inv, "--input", "input_csv",
                      "input point-cloud CSV (external_embedding)");
  add_override_option(cmd, inv, "--threads", "threads",
                      "worker threads (0 = hardware concurrency)");
}

int run_experiment_command(const Invocation& inv,
                           const std::string& experiment) {
  selftune::ExperimentConfig cfg;
  if (!inv.config_path.empty()) cfg = selftune::load_config(inv.config_path);
  for (const auto& [key, value] : inv.overrides)
    selftune::apply_override(&cfg, key, value);
  cfg.experiment = selftune::experiment_from_name(experiment);
  selftune::run_experiment(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kNN self-tuned kernel graph Laplacians: experiment harness"};
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "bandwidth_profile", "bandwidth_rate",     "dirichlet_sweep",
      "pointwise_sweep",   "standalone_y_study", "embedding",
      "external_embedding"};
  std::vector<Invocation> invocations(experiments.size());
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(experiments[i]);
    add_common_options(cmd, &invocations[i]);
  }

  // raw dataset export, mostly for piping back through external_embedding
  std::string sample_generator = "circle_r2";
  std::string sample_density = "sine_well";
  long long sample_n = 2000;
  std::uint64_t sample_seed = 1;
  std::string sample_out = "points.csv";
  CLI::App* sample = app.add_subcommand("sample", "export a sampled dataset");
  sample->add_option("--generator", sample_generator, "dataset generator");
  sample->add_option("--density", sample_density, "density preset");
  sample->add_option("--n", sample_n, "sample size");
  sample->add_option("--seed", sample_seed, "RNG seed");
  sample->add_option("--out", sample_out, "output CSV path");

  try {
    app.parse(argc, argv);
    if (sample->parsed()) {
      const selftune::ManifoldDataset ds = selftune::make_dataset(
          sample_generator, selftune::DensityProfile::preset(sample_density));
      selftune::save_csv_dataset(
          sample_out, ds.sample(static_cast<selftune::Index>(sample_n),
                                sample_seed));
      return 0;
    }
    for (std::size_t i = 0; i < experiments.size(); ++i)
      if (app.get_subcommand(experiments[i])->parsed())
        return run_experiment_command(invocations[i], experiments[i]);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "error: " << e.what() << "\n";
      return e.get_exit_code();
    }
    return app.exit(e);  // --help and friends
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
