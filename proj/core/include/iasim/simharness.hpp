// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "iasim/partition.hpp"

namespace iasim::harness {

enum class SweepVariable { kSnrDb, kNormalizedDoppler };

const char* to_string(SweepVariable v);

enum class PartitionStrategy { kExhaustive, kGreedy, kGeographic };

const char* to_string(PartitionStrategy s);

/// One deterministic Monte Carlo experiment: network + fading + algorithm +
/// CSI mechanism, swept over SNR or Doppler.
struct ExperimentConfig {
  netmodel::NetworkConfig network;
  netmodel::FadingProcess fading;
  precode::AlgoSpec algo;
  csimodel::CsiSpec csi;
  double coherence_constant = 0.423;  // block length = constant / doppler
  long coherence_cap = 1000000;
  SweepVariable sweep_variable = SweepVariable::kSnrDb;
  std::vector<double> sweep_values;  // non-empty, ascending
  int trials = 1;
  uint64_t seed = 1;
  std::string output_path;
  // partition-study extras
  PartitionStrategy partition_strategy = PartitionStrategy::kExhaustive;
  int geographic_target = 1;

  void validate() const;
};

/// Aggregate of one sweep point.
struct ResultRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string algorithm;
  std::string csi;
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
  double mean_eff_throughput = 0.0;
  double stderr_eff_throughput = 0.0;
  double mean_leakage = 0.0;
  double mean_overhead_symbols = 0.0;
  int trials = 0;
  int failures = 0;
};

inline constexpr const char* kCsvHeader =
    "sweep_var,sweep_value,algorithm,csi,mean_sum_rate,stderr_sum_rate,"
    "mean_eff_throughput,stderr_eff_throughput,mean_leakage,mean_overhead_symbols,"
    "trials,failures";

/// Runs every (sweep value, trial) cell; trial seeds derive from
/// (seed, sweep index, trial index), so output is identical for any worker
/// count. workers = 0 picks hardware concurrency.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int workers = 0);

std::string to_csv(const std::vector<ResultRow>& rows);

/// Runs the experiment and writes the CSV to config.output_path (or out_override).
std::vector<ResultRow> run_and_write(const ExperimentConfig& config, int workers = 0,
                                     const std::string& out_override = "");

struct PartitionTrialRow {
  double sweep_value = 0.0;
  int trial = 0;
  partition::Partition best;
  double best_score = 0.0;
};

struct PartitionStudyPoint {
  double sweep_value = 0.0;
  std::vector<PartitionTrialRow> rows;   // one per trial
  std::string modal_partition;           // most frequent best partition
  int modal_max_group_size = 0;
  double mean_best_score = 0.0;
  double mean_group_size = 0.0;          // mean over trials of K / group count
};

inline constexpr const char* kPartitionCsvHeader =
    "sweep_var,sweep_value,trial,best_partition,best_score,num_groups,max_group_size";

/// Doppler sweep of the best-partition search. Channels are paired across
/// sweep values (trial seeds depend on the trial index only) since Doppler
/// enters through the overhead discount alone.
std::vector<PartitionStudyPoint> run_partition_study(const ExperimentConfig& config,
                                                     int workers = 0);

std::string partition_study_csv(const std::vector<PartitionStudyPoint>& points);

// --- configuration files -------------------------------------------------

/// Strict JSON parsing: schema_version must be 1 and unknown keys are errors
/// reported with their field path.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Shipped experiment presets: fig4_iid, fig4_correlated, fig5_overhead,
/// fig6_partition.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Loads a config file, or a preset when the argument names one.
ExperimentConfig resolve_config(const std::string& path_or_preset);

// --- self-validation ------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidateReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;
};

struct ValidateOptions {
  // Test hook: flips the subspace-selection sign inside the monotonicity
  // check so the check is demonstrably able to fail.
  bool inject_leakage_sign_error = false;
};

/// Reduced-sample run of every module's invariant and oracle checks.
ValidateReport validate_suite(const ValidateOptions& options = {});

std::string to_string(const ValidateReport& report);

}  // namespace iasim::harness
