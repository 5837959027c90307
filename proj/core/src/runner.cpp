// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "iasim/rng.hpp"
#include "iasim/simharness.hpp"

namespace iasim::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct TrialOutcome {
  double sum_rate = 0.0;
  double eff_throughput = 0.0;
  double leakage = 0.0;
  double overhead = 0.0;
  bool failed = false;
};

ExperimentConfig at_sweep_point(const ExperimentConfig& base, double value) {
  ExperimentConfig cfg = base;
  if (cfg.sweep_variable == SweepVariable::kSnrDb) {
    cfg.network.tx_power = cfg.network.noise_var * std::pow(10.0, value / 10.0);
  } else {
    cfg.fading.normalized_doppler = value;
  }
  return cfg;
}

TrialOutcome run_trial(const ExperimentConfig& point_cfg, uint64_t trial_seed) {
  TrialOutcome out;
  const auto truth =
      netmodel::generate_channels(point_cfg.network, point_cfg.fading, trial_seed);
  try {
    const auto design =
        pipeline::run_design(truth, point_cfg.csi, point_cfg.algo, trial_seed);
    const long coherence =
        csimodel::coherence_length(point_cfg.fading.normalized_doppler,
                                   point_cfg.coherence_constant, point_cfg.coherence_cap);
    out.sum_rate = design.sum_rate;
    out.eff_throughput =
        csimodel::effective_throughput(design.sum_rate, design.overhead_symbols, coherence);
    out.leakage = design.leakage;
    out.overhead = static_cast<double>(design.overhead_symbols);
  } catch (const NumericalFailure&) {
    out.failed = true;  // counted per row, trial excluded from aggregates
  }
  return out;
}

/// Runs fn(task_index) over [0, n) on the requested number of threads.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
  size_t n_threads = workers > 0 ? static_cast<size_t>(workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, n);
  if (n_threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Two-pass mean and standard error in fixed trial order.
MeanStderr aggregate(const std::vector<double>& values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  const size_t points = config.sweep_values.size();
  const size_t trials = static_cast<size_t>(config.trials);
  std::vector<TrialOutcome> outcomes(points * trials);

  parallel_for(points * trials, workers, [&](size_t task) {
    const size_t s = task / trials;
    const size_t t = task % trials;
    const ExperimentConfig point_cfg = at_sweep_point(config, config.sweep_values[s]);
    const uint64_t trial_seed = rng::derive_trial_seed(config.seed, static_cast<uint32_t>(s),
                                                       static_cast<uint32_t>(t));
    outcomes[task] = run_trial(point_cfg, trial_seed);
  });

  std::vector<ResultRow> rows;
  rows.reserve(points);
  for (size_t s = 0; s < points; ++s) {
    ResultRow row;
    row.sweep_var = to_string(config.sweep_variable);
    row.sweep_value = config.sweep_values[s];
    row.algorithm = precode::to_string(config.algo.algorithm);
    row.csi = csimodel::to_string(config.csi.mechanism);
    row.trials = config.trials;

    std::vector<double> rates, effs, leaks, ohs;
    for (size_t t = 0; t < trials; ++t) {
      const TrialOutcome& o = outcomes[s * trials + t];
      if (o.failed) {
        ++row.failures;
        continue;
      }
      rates.push_back(o.sum_rate);
      effs.push_back(o.eff_throughput);
      leaks.push_back(o.leakage);
      ohs.push_back(o.overhead);
    }
    const auto r = aggregate(rates);
    const auto e = aggregate(effs);
    row.mean_sum_rate = r.mean;
    row.stderr_sum_rate = r.stderr_;
    row.mean_eff_throughput = e.mean;
    row.stderr_eff_throughput = e.stderr_;
    row.mean_leakage = aggregate(leaks).mean;
    row.mean_overhead_symbols = aggregate(ohs).mean;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.sweep_var + ',' + fmt(r.sweep_value) + ',' + r.algorithm + ',' + r.csi + ',' +
           fmt(r.mean_sum_rate) + ',' + fmt(r.stderr_sum_rate) + ',' +
           fmt(r.mean_eff_throughput) + ',' + fmt(r.stderr_eff_throughput) + ',' +
           fmt(r.mean_leakage) + ',' + fmt(r.mean_overhead_symbols) + ',' +
           std::to_string(r.trials) + ',' + std::to_string(r.failures) + '\n';
  }
  return out;
}

std::vector<ResultRow> run_and_write(const ExperimentConfig& config, int workers,
                                     const std::string& out_override) {
  auto rows = run_experiment(config, workers);
  const std::string path = out_override.empty() ? config.output_path : out_override;
  if (!path.empty()) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("output_path: cannot write '" + path + "'");
    out << to_csv(rows);
  }
  return rows;
}

std::vector<PartitionStudyPoint> run_partition_study(const ExperimentConfig& config,
                                                     int workers) {
  config.validate();
  if (config.sweep_variable != SweepVariable::kNormalizedDoppler) {
    throw ConfigError("partition study: sweep variable must be normalized_doppler");
  }
  if (config.partition_strategy == PartitionStrategy::kExhaustive && config.network.users > 10) {
    throw SizeLimit("partition study: exhaustive search limited to K <= 10");
  }
  const size_t points = config.sweep_values.size();
  const size_t trials = static_cast<size_t>(config.trials);

  // Channels are shared across Doppler values (Doppler only rescales the
  // overhead discount), so one evaluator per trial serves the whole sweep.
  std::vector<std::vector<PartitionTrialRow>> per_trial(trials);
  parallel_for(trials, workers, [&](size_t t) {
    const uint64_t trial_seed =
        rng::derive_trial_seed(config.seed, 0, static_cast<uint32_t>(t));
    const auto truth =
        netmodel::generate_channels(config.network, config.fading, trial_seed);
    partition::GroupEvaluator groups(truth, config.csi, config.algo, trial_seed);
    auto& rows = per_trial[t];
    for (size_t s = 0; s < points; ++s) {
      const double doppler = config.sweep_values[s];
      const long coherence = csimodel::coherence_length(doppler, config.coherence_constant,
                                                        config.coherence_cap);
      partition::PartitionScore best;
      switch (config.partition_strategy) {
        case PartitionStrategy::kExhaustive:
          best = partition::best_partition_exhaustive(groups, coherence);
          break;
        case PartitionStrategy::kGreedy: {
          const auto p = partition::greedy_grouping(partition::pathloss_table(config.network),
                                                    config.network, coherence, config.csi);
          best = partition::score_partition(p, groups, coherence);
          break;
        }
        case PartitionStrategy::kGeographic: {
          const auto p = partition::geographic_grouping(config.network,
                                                        config.geographic_target, trial_seed);
          best = partition::score_partition(p, groups, coherence);
          break;
        }
      }
      rows.push_back({doppler, static_cast<int>(t), best.partition, best.effective_sum_rate});
    }
  });

  std::vector<PartitionStudyPoint> out(points);
  for (size_t s = 0; s < points; ++s) {
    PartitionStudyPoint& pt = out[s];
    pt.sweep_value = config.sweep_values[s];
    std::map<std::string, int> counts;
    std::map<std::string, int> max_sizes;
    for (size_t t = 0; t < trials; ++t) {
      const PartitionTrialRow& row = per_trial[t][s];
      pt.rows.push_back(row);
      pt.mean_best_score += row.best_score;
      pt.mean_group_size += row.best.mean_group_size();
      const std::string key = partition::to_string(row.best);
      ++counts[key];
      max_sizes.emplace(key, row.best.max_group_size());
    }
    pt.mean_best_score /= static_cast<double>(trials);
    pt.mean_group_size /= static_cast<double>(trials);
    int best_count = -1;
    for (const auto& [key, count] : counts) {  // map order breaks ties deterministically
      if (count > best_count) {
        best_count = count;
        pt.modal_partition = key;
        pt.modal_max_group_size = max_sizes[key];
      }
    }
  }
  return out;
}

std::string partition_study_csv(const std::vector<PartitionStudyPoint>& points) {
  std::string out = kPartitionCsvHeader;
  out += '\n';
  for (const auto& pt : points) {
    for (const auto& row : pt.rows) {
      out += std::string("normalized_doppler,") + fmt(row.sweep_value) + ',' +
             std::to_string(row.trial) + ',' + partition::to_string(row.best) + ',' +
             fmt(row.best_score) + ',' + std::to_string(row.best.groups.size()) + ',' +
             std::to_string(row.best.max_group_size()) + '\n';
    }
  }
  return out;
}

}  // namespace iasim::harness
