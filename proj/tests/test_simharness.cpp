// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "iasim/simharness.hpp"

using namespace iasim;
using harness::ExperimentConfig;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.network = netmodel::NetworkConfig::symmetric(3, 2, 2, 1);
  cfg.algo.algorithm = precode::Algorithm::kMinLeakage;
  cfg.algo.options.max_iters = 60;
  cfg.algo.options.tol = 1e-8;
  cfg.sweep_variable = harness::SweepVariable::kSnrDb;
  cfg.sweep_values = {0.0, 20.0};
  cfg.trials = 8;
  cfg.seed = 4242;
  return cfg;
}

const char* kMinimalJson = R"json({
  "schema_version": 1,
  "network": {"users": 3, "tx_antennas": 2, "rx_antennas": 2, "streams": 1},
  "algorithm": {"name": "min_leakage", "max_iters": 50, "tol": 1e-8},
  "sweep": {"variable": "snr_db", "values": [0, 10]},
  "trials": 2,
  "seed": 7
})json";

}  // namespace

TEST_SUITE_BEGIN("simharness");

TEST_CASE("csv header is pinned") {
  CHECK(std::string(harness::kCsvHeader) ==
        "sweep_var,sweep_value,algorithm,csi,mean_sum_rate,stderr_sum_rate,"
        "mean_eff_throughput,stderr_eff_throughput,mean_leakage,mean_overhead_symbols,"
        "trials,failures");
}

TEST_CASE("identical config and seed give byte-identical csv") {
  const auto cfg = tiny_config();
  const auto a = harness::to_csv(harness::run_experiment(cfg, 1));
  const auto b = harness::to_csv(harness::run_experiment(cfg, 1));
  CHECK(a == b);
}

TEST_CASE("worker count does not change the csv") {
  const auto cfg = tiny_config();
  const auto serial = harness::to_csv(harness::run_experiment(cfg, 1));
  const auto parallel = harness::to_csv(harness::run_experiment(cfg, 4));
  CHECK(serial == parallel);
}

TEST_CASE("rows carry the requested sweep grid and trial counts") {
  const auto cfg = tiny_config();
  const auto rows = harness::run_experiment(cfg, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sweep_value == 0.0);
  CHECK(rows[1].sweep_value == 20.0);
  for (const auto& row : rows) {
    CHECK(row.sweep_var == "snr_db");
    CHECK(row.algorithm == "min_leakage");
    CHECK(row.csi == "perfect");
    CHECK(row.trials == 8);
    CHECK(row.failures == 0);
    CHECK(row.mean_sum_rate > 0.0);
    CHECK(row.stderr_sum_rate >= 0.0);
    CHECK(row.mean_overhead_symbols == 0.0);
    CHECK(row.mean_eff_throughput == row.mean_sum_rate);  // no overhead, static channel
  }
  CHECK(rows[1].mean_sum_rate > rows[0].mean_sum_rate);  // more SNR, more rate
}

TEST_CASE("standard error shrinks like one over sqrt trials") {
  auto cfg = tiny_config();
  cfg.sweep_values = {10.0};
  cfg.trials = 64;
  const auto small = harness::run_experiment(cfg, 2);
  cfg.trials = 256;
  const auto big = harness::run_experiment(cfg, 2);
  const double ratio = small[0].stderr_sum_rate / big[0].stderr_sum_rate;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("config json parses and validates strictly") {
  const auto cfg = harness::parse_config_json(kMinimalJson);
  CHECK(cfg.network.users == 3);
  CHECK(cfg.algo.algorithm == precode::Algorithm::kMinLeakage);
  CHECK(cfg.sweep_values == std::vector<double>{0.0, 10.0});
  CHECK(cfg.trials == 2);

  SUBCASE("unknown keys are rejected with their path") {
    std::string bad = kMinimalJson;
    bad.replace(bad.find("\"users\""), 7, "\"userz\"");
    try {
      harness::parse_config_json(bad);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("config.network") != std::string::npos);
      CHECK(std::string(e.what()).find("userz") != std::string::npos);
    }
  }
  SUBCASE("wrong schema version is rejected") {
    std::string bad = kMinimalJson;
    bad.replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    CHECK_THROWS_AS(harness::parse_config_json(bad), ConfigError);
  }
  SUBCASE("descending sweep values are rejected") {
    std::string bad = kMinimalJson;
    bad.replace(bad.find("[0, 10]"), 7, "[10, 0]");
    CHECK_THROWS_AS(harness::parse_config_json(bad), ConfigError);
  }
}

TEST_CASE("presets load, validate and round-trip through json") {
  for (const auto& name : harness::preset_names()) {
    const auto cfg = harness::preset(name);
    CHECK_NOTHROW(cfg.validate());
    const auto round = harness::parse_config_json(harness::config_to_json(cfg));
    CHECK(round.network.users == cfg.network.users);
    CHECK(round.sweep_values == cfg.sweep_values);
    CHECK(round.trials == cfg.trials);
    CHECK(round.seed == cfg.seed);
    CHECK(round.algo.algorithm == cfg.algo.algorithm);
    CHECK(round.csi.mechanism == cfg.csi.mechanism);
  }
  CHECK_THROWS_AS(harness::preset("fig7_unknown"), ConfigError);
  CHECK_NOTHROW(harness::resolve_config("fig4_iid"));
  CHECK_THROWS_AS(harness::resolve_config("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("tracked feedback snr follows the swept operating point") {
  auto cfg = tiny_config();
  cfg.csi.mechanism = csimodel::Mechanism::kAnalogFeedback;
  cfg.csi.snr_tracks_operating = true;
  cfg.sweep_values = {0.0, 30.0};
  const auto rows = harness::run_experiment(cfg, 2);
  REQUIRE(rows.size() == 2);
  // Overhead is SNR-independent, distortion is not; both rows must report
  // the same symbol count and nonzero rates.
  CHECK(rows[0].mean_overhead_symbols == rows[1].mean_overhead_symbols);
  CHECK(rows[0].mean_overhead_symbols == 48.0);
  CHECK(rows[0].csi == "analog_feedback");
}

TEST_CASE("partition study runs deterministically and aggregates") {
  ExperimentConfig cfg;
  cfg.network = netmodel::NetworkConfig::symmetric(3, 2, 2, 1);
  cfg.network.tx_power = 10.0;
  cfg.algo.algorithm = precode::Algorithm::kMinLeakage;
  cfg.algo.options.max_iters = 120;
  cfg.algo.options.tol = 1e-8;
  cfg.csi.mechanism = csimodel::Mechanism::kAnalogFeedback;
  cfg.csi.snr_tracks_operating = true;
  cfg.sweep_variable = harness::SweepVariable::kNormalizedDoppler;
  cfg.sweep_values = {1e-4, 2e-2};
  cfg.trials = 6;
  cfg.seed = 31337;
  cfg.partition_strategy = harness::PartitionStrategy::kExhaustive;

  const auto a = harness::run_partition_study(cfg, 1);
  const auto b = harness::run_partition_study(cfg, 3);
  REQUIRE(a.size() == 2);
  CHECK(harness::partition_study_csv(a) == harness::partition_study_csv(b));
  for (const auto& pt : a) {
    CHECK(pt.rows.size() == 6);
    CHECK(!pt.modal_partition.empty());
    CHECK(pt.mean_group_size >= 1.0);
    CHECK(pt.mean_group_size <= 3.0);
  }
  // Slow fading tolerates cooperation; fast fading pays too much overhead.
  CHECK(a[0].mean_group_size >= a[1].mean_group_size);
  CHECK(a[1].modal_partition == "{1}|{2}|{3}");
}

TEST_CASE("sweep variable mismatch is a config error") {
  auto cfg = tiny_config();
  cfg.sweep_variable = harness::SweepVariable::kNormalizedDoppler;
  cfg.sweep_values = {0.6};  // outside [0, 0.5)
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_SUITE_END();
