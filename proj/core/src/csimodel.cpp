// SPDX-License-Identifier: Apache-2.0

#include "iasim/csimodel.hpp"

#include <cmath>
#include <limits>

#include "iasim/rng.hpp"

namespace iasim::csimodel {

const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kPerfect:
      return "perfect";
    case Mechanism::kAnalogFeedback:
      return "analog_feedback";
    default:
      return "reciprocity";
  }
}

Mechanism mechanism_from_string(const std::string& name) {
  if (name == "perfect") return Mechanism::kPerfect;
  if (name == "analog_feedback") return Mechanism::kAnalogFeedback;
  if (name == "reciprocity") return Mechanism::kReciprocity;
  throw ConfigError("unknown csi mechanism '" + name + "'");
}

long coherence_length(double normalized_doppler, double constant, long cap) {
  if (!(normalized_doppler >= 0.0) || normalized_doppler >= 0.5) {
    throw ContractViolation("coherence_length: normalized doppler must lie in [0, 0.5)");
  }
  if (normalized_doppler == 0.0) return cap;
  // Small forward guard so exact ratios like 0.423/0.00423 land on the integer.
  const long n = static_cast<long>(std::floor(constant / normalized_doppler + 1e-9));
  return std::min(cap, std::max(1L, n));
}

long CoherenceModel::block_length() const {
  return coherence_length(normalized_doppler, constant, cap);
}

double analog_feedback_error_var(double forward_snr, double reverse_snr, int training_reuse) {
  if (!(forward_snr > 0.0) || !(reverse_snr > 0.0)) {
    throw ContractViolation("analog feedback: SNRs must be positive");
  }
  if (training_reuse < 1) {
    throw ContractViolation("analog feedback: training_reuse must be >= 1");
  }
  const double r = static_cast<double>(training_reuse);
  const double fwd = std::isinf(forward_snr) ? 0.0 : 1.0 / (r * forward_snr);
  const double rev = std::isinf(reverse_snr) ? 0.0 : 1.0 / (r * reverse_snr);
  return fwd + rev;
}

long analog_feedback_overhead(const NetworkConfig& config, int training_reuse) {
  const long r = training_reuse;
  long pilots = 0;
  long coefficients = 0;
  for (int i = 0; i < config.users; ++i) {
    pilots += r * (config.tx_antennas[static_cast<size_t>(i)] +
                   config.rx_antennas[static_cast<size_t>(i)]);
    for (int l = 0; l < config.users; ++l) {
      if (!config.link_active(i, l)) continue;
      coefficients += r * config.tx_antennas[static_cast<size_t>(l)] *
                      config.rx_antennas[static_cast<size_t>(i)];
    }
  }
  return pilots + coefficients;
}

CsiReport apply_analog_feedback(const ChannelSet& true_channels, double forward_snr,
                                double reverse_snr, int training_reuse, uint64_t seed) {
  const NetworkConfig& cfg = true_channels.config();
  const double err_var = analog_feedback_error_var(forward_snr, reverse_snr, training_reuse);
  const double err_std = std::sqrt(err_var);

  std::vector<std::vector<CMatrix>> h(static_cast<size_t>(cfg.users));
  for (int i = 0; i < cfg.users; ++i) {
    h[static_cast<size_t>(i)].resize(static_cast<size_t>(cfg.users));
    for (int l = 0; l < cfg.users; ++l) {
      CMatrix m = true_channels.h(i, l);
      if (cfg.link_active(i, l) && err_var > 0.0) {
        rng::Substream stream(seed, rng::StreamDomain::kFeedbackNoise,
                              rng::pack_pair(static_cast<uint32_t>(i), static_cast<uint32_t>(l)));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) += err_std * stream.complex_gaussian();
          }
        }
      }
      h[static_cast<size_t>(i)][static_cast<size_t>(l)] = std::move(m);
    }
  }
  return CsiReport{ChannelSet(cfg, std::move(h)),
                   analog_feedback_overhead(cfg, training_reuse),
                   Mechanism::kAnalogFeedback};
}

ReciprocityResult run_reciprocity_loop(const ChannelSet& true_channels, const AlgoOptions& opts,
                                       long pilot_cost_per_round, int rounds, double pilot_snr) {
  if (rounds < 0) throw ContractViolation("reciprocity: rounds must be >= 0");
  if (!(pilot_snr > 0.0)) throw ContractViolation("reciprocity: pilot SNR must be positive");
  const NetworkConfig& cfg = true_channels.config();

  ReciprocityResult out{precode::PrecoderSet{},
                        precode::CombinerSet{},
                        CsiReport{true_channels, pilot_cost_per_round * rounds,
                                  Mechanism::kReciprocity},
                        {}};
  if (rounds == 0) {
    out.precoders = precode::random_precoders(cfg, opts.seed);
    out.combiners.w.resize(static_cast<size_t>(cfg.users));
    for (int i = 0; i < cfg.users; ++i) {
      const int nr = cfg.rx_antennas[static_cast<size_t>(i)];
      out.combiners.w[static_cast<size_t>(i)] =
          CMatrix::Identity(nr, nr).leftCols(cfg.streams[static_cast<size_t>(i)]);
    }
    return out;
  }

  AlgoOptions run_opts = opts;
  run_opts.max_iters = rounds;

  precode::detail::DescentHooks hooks;
  const bool noisy = !std::isinf(pilot_snr);
  if (noisy) {
    const double sigma = 1.0 / std::sqrt(pilot_snr);
    const uint64_t seed = opts.seed;
    hooks.cov_noise = [sigma, seed](int node, int side, int iter, Eigen::Index dim) {
      rng::Substream stream(seed, rng::StreamDomain::kPilotObsNoise,
                            rng::pack_pair(static_cast<uint32_t>(node),
                                           static_cast<uint32_t>(side)),
                            static_cast<uint32_t>(iter));
      CMatrix g(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
          g(r, c) = stream.complex_gaussian();
        }
      }
      // Hermitian perturbation of the covariance estimate.
      return CMatrix(sigma * 0.5 * (g + g.adjoint()));
    };
  }

  auto descent =
      precode::detail::leakage_descent(true_channels, run_opts, noisy ? &hooks : nullptr);
  out.precoders = std::move(descent.precoders);
  out.combiners = std::move(descent.combiners);
  out.leakage_trace = std::move(descent.leakage_trace);
  return out;
}

double effective_throughput(double sum_rate, long overhead_symbols, long coherence_len) {
  if (coherence_len < 1) throw ContractViolation("effective_throughput: coherence length < 1");
  const double fraction =
      1.0 - static_cast<double>(overhead_symbols) / static_cast<double>(coherence_len);
  return std::max(0.0, fraction) * sum_rate;
}

}  // namespace iasim::csimodel
