// SPDX-License-Identifier: Apache-2.0

#include "iasim/pipeline.hpp"

#include <cmath>

#include "iasim/linkeval.hpp"

namespace iasim::pipeline {

namespace {

/// TDMA evaluated with waterfilling precoders from the acquired CSI against
/// the true direct channels.
DesignOutcome eval_tdma(const ChannelSet& truth, const ChannelSet& estimated, long overhead) {
  const auto& cfg = truth.config();
  double acc = 0.0;
  for (int i = 0; i < cfg.users; ++i) {
    const auto wf = precode::waterfill(estimated.h(i, i), cfg.tx_power, cfg.noise_var);
    if (wf.precoder.cols() == 0) continue;
    const CMatrix hv = truth.h(i, i) * wf.precoder;
    const int nr = cfg.rx_antennas[static_cast<size_t>(i)];
    const CMatrix m = CMatrix::Identity(nr, nr) + (hv * hv.adjoint()) / cfg.noise_var;
    acc += numkit::log2_det_hpd(m);
  }
  return {acc / cfg.users, 0.0, overhead};
}

}  // namespace

csimodel::CsiSpec resolve_csi(const csimodel::CsiSpec& spec,
                              const netmodel::NetworkConfig& config) {
  csimodel::CsiSpec out = spec;
  if (out.snr_tracks_operating) {
    const double snr = config.tx_power / config.noise_var;
    out.forward_snr = snr;
    out.reverse_snr = snr;
    out.pilot_snr = snr;
  }
  return out;
}

DesignOutcome run_design(const ChannelSet& truth, const csimodel::CsiSpec& csi_in,
                         const precode::AlgoSpec& algo, uint64_t seed) {
  const csimodel::CsiSpec csi = resolve_csi(csi_in, truth.config());
  precode::AlgoOptions opts = algo.options;
  opts.seed = seed;

  if (csi.mechanism == csimodel::Mechanism::kReciprocity) {
    if (algo.algorithm != precode::Algorithm::kMinLeakage) {
      throw ConfigError(
          "csi.mechanism: reciprocity implements the leakage descent and requires "
          "algorithm 'min_leakage'");
    }
    const auto loop = csimodel::run_reciprocity_loop(truth, opts, csi.pilot_cost_per_round,
                                                     csi.rounds, csi.pilot_snr);
    const auto metrics = linkeval::sum_rate(truth, loop.precoders, &loop.combiners);
    return {metrics.sum_rate, metrics.leakage, loop.report.overhead_symbols};
  }

  long overhead = 0;
  ChannelSet estimated = truth;
  if (csi.mechanism == csimodel::Mechanism::kAnalogFeedback) {
    auto report = csimodel::apply_analog_feedback(truth, csi.forward_snr, csi.reverse_snr,
                                                  csi.training_reuse, seed);
    overhead = report.overhead_symbols;
    estimated = std::move(report.estimated);
  }

  switch (algo.algorithm) {
    case precode::Algorithm::kTdma:
      return eval_tdma(truth, estimated, overhead);
    case precode::Algorithm::kClosedFormIa: {
      const auto sol = precode::closed_form_ia_3user(estimated);
      const auto metrics = linkeval::sum_rate(truth, sol.precoders, &sol.combiners);
      return {metrics.sum_rate, metrics.leakage, overhead};
    }
    case precode::Algorithm::kMinLeakage: {
      const auto res = precode::min_leakage(estimated, opts);
      const auto metrics = linkeval::sum_rate(truth, res.precoders, &res.combiners);
      return {metrics.sum_rate, metrics.leakage, overhead};
    }
    case precode::Algorithm::kMaxSinr: {
      const auto sol = precode::max_sinr(estimated, opts);
      const auto metrics = linkeval::sum_rate(truth, sol.precoders, &sol.combiners);
      return {metrics.sum_rate, metrics.leakage, overhead};
    }
    case precode::Algorithm::kWmmse: {
      const auto res = precode::wmmse_sum_rate(estimated, opts);
      const auto metrics = linkeval::sum_rate_raw(truth, res.precoders, &res.combiners);
      precode::PrecoderSet directions;
      directions.f.resize(res.precoders.size());
      for (size_t i = 0; i < res.precoders.size(); ++i) {
        const CMatrix& v = res.precoders[i];
        try {
          directions.f[i] = numkit::orthonormalize(v, v.cols());
        } catch (const Error&) {
          directions.f[i] = CMatrix::Identity(v.rows(), v.rows()).leftCols(v.cols());
        }
      }
      const double leak = linkeval::leakage(truth, directions, res.combiners);
      return {metrics.sum_rate, leak, overhead};
    }
  }
  throw ContractViolation("run_design: unhandled algorithm");
}

}  // namespace iasim::pipeline
