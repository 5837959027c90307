// SPDX-License-Identifier: Apache-2.0
//
// iasim — Monte Carlo studies of interference alignment on the K-user MIMO
// interference channel: precoder algorithms, CSI acquisition overhead, and
// overhead-aware user partitioning.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "iasim/simharness.hpp"

namespace {

using iasim::harness::ExperimentConfig;
using iasim::harness::SweepVariable;

struct GlobalOverrides {
  std::optional<uint64_t> seed;
  std::optional<int> trials;
  int workers = 0;
  std::string out;
};

void apply(const GlobalOverrides& g, ExperimentConfig& cfg) {
  if (g.seed) cfg.seed = *g.seed;
  if (g.trials) cfg.trials = *g.trials;
  if (!g.out.empty()) cfg.output_path = g.out;
}

int run_sweep(const std::string& config_arg, const GlobalOverrides& g, SweepVariable expected) {
  ExperimentConfig cfg = iasim::harness::resolve_config(config_arg);
  if (cfg.sweep_variable != expected) {
    throw iasim::ConfigError(std::string("config.sweep.variable: this subcommand sweeps ") +
                             iasim::harness::to_string(expected));
  }
  apply(g, cfg);
  const auto rows = iasim::harness::run_and_write(cfg, g.workers);
  std::cout << iasim::harness::to_csv(rows);
  if (!cfg.output_path.empty()) {
    std::cerr << "wrote " << cfg.output_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-user MIMO interference channel simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOverrides g;
  app.add_option("--seed", g.seed, "Master seed override")->envname("IASIM_SEED");
  app.add_option("--trials", g.trials, "Trial count override")->envname("IASIM_TRIALS");
  app.add_option("--workers", g.workers, "Worker thread count (0 = hardware)")
      ->envname("IASIM_WORKERS");
  app.add_option("--out", g.out, "Output CSV path override")->envname("IASIM_OUT");

  std::string config_arg;
  auto* snr = app.add_subcommand("sweep-snr", "Run an SNR sweep from a config file or preset");
  snr->add_option("config", config_arg, "Config file path or preset name")->required();

  auto* doppler =
      app.add_subcommand("sweep-doppler", "Run a normalized-Doppler sweep");
  doppler->add_option("config", config_arg, "Config file path or preset name")->required();

  auto* study = app.add_subcommand("partition-study",
                                   "Best-partition search across a Doppler sweep");
  study->add_option("config", config_arg, "Config file path or preset name")->required();

  int k = 0, nt = 0, nr = 0, d = 0;
  auto* feas = app.add_subcommand("feasibility", "Alignment feasibility of a symmetric system");
  feas->add_option("--k", k, "User pair count")->required();
  feas->add_option("--nt", nt, "Transmit antennas per user")->required();
  feas->add_option("--nr", nr, "Receive antennas per user")->required();
  feas->add_option("--d", d, "Streams per user")->required();

  auto* validate = app.add_subcommand("validate", "Run the invariant/oracle self-checks");
  bool mutate = false;
  validate->add_flag("--mutate-leakage", mutate,
                     "Inject a sign error into the leakage subspace selection (the "
                     "monotonicity check must then fail)")
      ->group("");  // hidden test hook

  std::string preset_name;
  auto* emit = app.add_subcommand("emit-preset", "Print a shipped preset as JSON");
  emit->add_option("name", preset_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (snr->parsed()) return run_sweep(config_arg, g, SweepVariable::kSnrDb);
    if (doppler->parsed()) return run_sweep(config_arg, g, SweepVariable::kNormalizedDoppler);
    if (study->parsed()) {
      ExperimentConfig cfg = iasim::harness::resolve_config(config_arg);
      apply(g, cfg);
      const auto points = iasim::harness::run_partition_study(cfg, g.workers);
      const std::string csv = iasim::harness::partition_study_csv(points);
      std::cout << csv;
      for (const auto& pt : points) {
        std::cerr << "doppler " << pt.sweep_value << ": modal " << pt.modal_partition
                  << ", mean score " << pt.mean_best_score << ", mean group size "
                  << pt.mean_group_size << "\n";
      }
      if (!cfg.output_path.empty()) {
        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out) throw iasim::ConfigError("output_path: cannot write '" + cfg.output_path + "'");
        out << csv;
        std::cerr << "wrote " << cfg.output_path << "\n";
      }
      return 0;
    }
    if (feas->parsed()) {
      const auto cfg = iasim::netmodel::NetworkConfig::symmetric(k, nt, nr, d);
      std::cout << iasim::precode::to_string(iasim::precode::check_feasibility(cfg)) << "\n";
      return 0;
    }
    if (validate->parsed()) {
      iasim::harness::ValidateOptions opts;
      opts.inject_leakage_sign_error = mutate;
      const auto report = iasim::harness::validate_suite(opts);
      std::cout << iasim::harness::to_string(report);
      return report.all_pass ? 0 : 2;
    }
    if (emit->parsed()) {
      std::cout << iasim::harness::config_to_json(iasim::harness::preset(preset_name));
      return 0;
    }
  } catch (const iasim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const iasim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
