// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "iasim/csimodel.hpp"
#include "iasim/linkeval.hpp"

using namespace iasim;
using netmodel::FadingProcess;
using netmodel::NetworkConfig;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE_BEGIN("csimodel");

TEST_CASE("coherence length") {
  CHECK(csimodel::coherence_length(0.0) == 1000000);
  CHECK(csimodel::coherence_length(0.00423) == 100);
  CHECK(csimodel::coherence_length(0.423) == 1);
  CHECK(csimodel::coherence_length(0.0, 0.423, 500) == 500);  // configurable cap
  CHECK_THROWS_AS(csimodel::coherence_length(0.5), ContractViolation);
  CHECK_THROWS_AS(csimodel::coherence_length(-0.1), ContractViolation);

  csimodel::CoherenceModel model;
  model.normalized_doppler = 0.00423;
  CHECK(model.block_length() == 100);

  // Block length never grows with Doppler.
  long prev = csimodel::coherence_length(1e-6);
  for (double f : {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.45}) {
    const long len = csimodel::coherence_length(f);
    CHECK(len <= prev);
    CHECK(len >= 1);
    prev = len;
  }
}

TEST_CASE("analog feedback noiseless limit") {
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  const auto truth = netmodel::generate_channels(cfg, FadingProcess{}, 19);
  const auto report = csimodel::apply_analog_feedback(truth, kInf, kInf, 2, 19);
  CHECK(report.estimated.identical_to(truth));
  CHECK(report.mechanism == csimodel::Mechanism::kAnalogFeedback);
  // 2 repetitions: pilots 2*3*(2+2) = 24, coefficients 2*9*4 = 72.
  CHECK(report.overhead_symbols == 96);
}

TEST_CASE("analog feedback error variance model") {
  CHECK(csimodel::analog_feedback_error_var(10.0, 10.0, 1) == doctest::Approx(0.2));
  // Doubling the reverse SNR with a noiseless forward link halves the variance.
  const double base = csimodel::analog_feedback_error_var(kInf, 10.0, 1);
  CHECK(csimodel::analog_feedback_error_var(kInf, 20.0, 1) == 0.5 * base);
  // Training reuse averages both contributions.
  CHECK(csimodel::analog_feedback_error_var(10.0, 10.0, 4) == doctest::Approx(0.05));
  CHECK_THROWS_AS(csimodel::analog_feedback_error_var(-1.0, 10.0, 1), ContractViolation);
}

TEST_CASE("analog feedback empirical MSE matches the model") {
  const auto cfg = NetworkConfig::symmetric(10, 10, 10, 1);
  const auto truth = netmodel::generate_channels(cfg, FadingProcess{}, 20);
  const auto report = csimodel::apply_analog_feedback(truth, 10.0, 10.0, 1, 99);
  double err = 0.0;
  size_t n = 0;
  for (int i = 0; i < cfg.users; ++i) {
    for (int l = 0; l < cfg.users; ++l) {
      err += (report.estimated.h(i, l) - truth.h(i, l)).squaredNorm();
      n += static_cast<size_t>(truth.h(i, l).size());
    }
  }
  const double mse = err / static_cast<double>(n);
  CHECK(std::abs(mse - 0.2) <= 0.01);  // +-5% at 1e5 entries
}

TEST_CASE("analog feedback is deterministic and respects the mask") {
  NetworkConfig cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  cfg.connectivity[0][2] = false;
  const auto truth = netmodel::generate_channels(cfg, FadingProcess{}, 21);
  const auto a = csimodel::apply_analog_feedback(truth, 10.0, 10.0, 1, 5);
  const auto b = csimodel::apply_analog_feedback(truth, 10.0, 10.0, 1, 5);
  CHECK(a.estimated.identical_to(b.estimated));
  CHECK(a.estimated.h(0, 2).cwiseAbs().maxCoeff() == 0.0);  // masked link stays zero
}

TEST_CASE("noiseless reciprocity reproduces the descent trace bit for bit") {
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  for (int s = 0; s < 5; ++s) {
    const auto ch = netmodel::generate_channels(cfg, FadingProcess{}, 600 + s);
    precode::AlgoOptions opts;
    opts.max_iters = 250;
    opts.tol = 1e-300;
    opts.seed = 600 + static_cast<uint64_t>(s);
    const auto direct = precode::min_leakage(ch, opts);
    const auto loop = csimodel::run_reciprocity_loop(ch, opts, 12, 250, kInf);
    REQUIRE(loop.leakage_trace.size() == direct.leakage_trace.size());
    for (size_t t = 0; t < direct.leakage_trace.size(); ++t) {
      REQUIRE(loop.leakage_trace[t] == direct.leakage_trace[t]);
    }
    CHECK(loop.report.overhead_symbols == 12 * 250);
    for (int u = 0; u < 3; ++u) {
      REQUIRE((loop.precoders.f[u] - direct.precoders.f[u]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("zero rounds returns the initial precoders at zero overhead") {
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  const auto ch = netmodel::generate_channels(cfg, FadingProcess{}, 33);
  precode::AlgoOptions opts;
  opts.seed = 33;
  const auto loop = csimodel::run_reciprocity_loop(ch, opts, 12, 0, kInf);
  CHECK(loop.report.overhead_symbols == 0);
  const auto init = precode::random_precoders(cfg, 33);
  for (int u = 0; u < 3; ++u) {
    CHECK((loop.precoders.f[u] - init.f[u]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("noiseless reciprocity aligns feasible systems") {
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  precode::AlgoOptions opts;
  opts.tol = 1e-12;
  int converged = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    opts.seed = 700 + static_cast<uint64_t>(s);
    const auto ch = netmodel::generate_channels(cfg, FadingProcess{}, 700 + s);
    const auto loop = csimodel::run_reciprocity_loop(ch, opts, 12, 5000, kInf);
    if (loop.leakage_trace.back() <= 1e-6) ++converged;
  }
  CHECK(converged >= static_cast<int>(0.95 * seeds));
}

TEST_CASE("noisy pilots still descend and change the trajectory") {
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  const auto ch = netmodel::generate_channels(cfg, FadingProcess{}, 44);
  precode::AlgoOptions opts;
  opts.max_iters = 400;
  opts.tol = 1e-300;
  opts.seed = 44;
  const auto clean = csimodel::run_reciprocity_loop(ch, opts, 12, 400, kInf);
  const auto noisy = csimodel::run_reciprocity_loop(ch, opts, 12, 400, 1000.0);
  CHECK(noisy.leakage_trace.back() < noisy.leakage_trace.front());
  CHECK(noisy.leakage_trace.back() != clean.leakage_trace.back());
}

TEST_CASE("effective throughput") {
  CHECK(csimodel::effective_throughput(10.0, 0, 1000) == 10.0);
  CHECK(csimodel::effective_throughput(10.0, 100, 1000) == doctest::Approx(9.0));
  CHECK(csimodel::effective_throughput(10.0, 1000, 1000) == 0.0);
  CHECK(csimodel::effective_throughput(10.0, 5000, 1000) == 0.0);
  CHECK_THROWS_AS(csimodel::effective_throughput(10.0, 0, 0), ContractViolation);

  // Non-increasing in Doppler with everything else fixed.
  double prev = 1e300;
  for (double f : {1e-5, 1e-4, 1e-3, 1e-2}) {
    const double eff = csimodel::effective_throughput(10.0, 150, csimodel::coherence_length(f));
    CHECK(eff <= prev);
    prev = eff;
  }
}

TEST_CASE("analog feedback preserves the alignment slope") {
  // Joint forward/reverse SNR scaling keeps the DoF of the aligned system.
  const auto cfg = NetworkConfig::symmetric(3, 2, 2, 1);
  const std::vector<double> snr_db = {30.0, 35.0, 40.0};
  std::vector<double> perfect(snr_db.size(), 0.0), feedback(snr_db.size(), 0.0);
  const int trials = 60;
  precode::AlgoOptions opts;
  opts.max_iters = 3000;
  opts.tol = 1e-10;
  for (size_t sp = 0; sp < snr_db.size(); ++sp) {
    NetworkConfig at = cfg;
    at.tx_power = std::pow(10.0, snr_db[sp] / 10.0);
    for (int t = 0; t < trials; ++t) {
      const auto truth = netmodel::generate_channels(at, FadingProcess{}, 5200 + t);
      opts.seed = 5200 + static_cast<uint64_t>(t);
      const auto clean = precode::min_leakage(truth, opts);
      perfect[sp] +=
          linkeval::sum_rate(truth, clean.precoders, &clean.combiners).sum_rate / trials;
      const double link_snr = at.tx_power / at.noise_var;
      const auto report =
          csimodel::apply_analog_feedback(truth, link_snr, link_snr, 1, 5200 + t);
      const auto est = precode::min_leakage(report.estimated, opts);
      feedback[sp] +=
          linkeval::sum_rate(truth, est.precoders, &est.combiners).sum_rate / trials;
    }
  }
  const double slope_perfect = linkeval::fit_dof_slope(snr_db, perfect);
  const double slope_feedback = linkeval::fit_dof_slope(snr_db, feedback);
  CHECK(std::abs(slope_perfect - slope_feedback) <= 0.3);
}

TEST_SUITE_END();
