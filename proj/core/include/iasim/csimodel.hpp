// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "iasim/precode.hpp"

namespace iasim::csimodel {

using netmodel::ChannelSet;
using netmodel::NetworkConfig;
using precode::AlgoOptions;
using precode::CombinerSet;
using precode::PrecoderSet;

enum class Mechanism { kPerfect, kAnalogFeedback, kReciprocity };

const char* to_string(Mechanism m);

/// CSI as seen by the transmit side, plus the symbol overhead paid to get it.
struct CsiReport {
  ChannelSet estimated;
  long overhead_symbols = 0;
  Mechanism mechanism = Mechanism::kPerfect;
};

/// Coherence block length from normalized Doppler via the level-crossing
/// approximation constant (configurable, default 0.423), capped for static channels.
struct CoherenceModel {
  double normalized_doppler = 0.0;
  double constant = 0.423;
  long cap = 1000000;

  long block_length() const;
};

long coherence_length(double normalized_doppler, double constant = 0.423, long cap = 1000000);

/// Per-entry CSI error variance of analog feedback:
/// 1/(reuse * forward_snr) + 1/(reuse * reverse_snr). Infinite SNRs contribute 0.
double analog_feedback_error_var(double forward_snr, double reverse_snr, int training_reuse);

/// Training + feedback symbol count for one analog-feedback acquisition round:
/// forward and reverse pilots per user plus one modulated symbol per channel
/// coefficient of every mask-true link, all repeated training_reuse times.
long analog_feedback_overhead(const NetworkConfig& config, int training_reuse);

/// Unquantized channel-coefficient feedback: estimate = truth + white complex
/// Gaussian error at the modeled variance. Deterministic in seed.
CsiReport apply_analog_feedback(const ChannelSet& true_channels, double forward_snr,
                                double reverse_snr, int training_reuse, uint64_t seed);

struct ReciprocityResult {
  PrecoderSet precoders;
  CombinerSet combiners;
  CsiReport report;                   // estimated carries the true set; no
                                      // explicit channel estimate is exchanged
  std::vector<double> leakage_trace;  // evaluated on the true channels
};

/// Over-the-air ping-pong subspace iteration: the least-interference descent of
/// min_leakage where each side only observes its own (optionally noisy)
/// interference covariance. With infinite pilot SNR the iterate sequence is
/// identical to min_leakage's for the same options, and rounds bounds the
/// iteration count. overhead = rounds * pilot_cost_per_round.
ReciprocityResult run_reciprocity_loop(const ChannelSet& true_channels, const AlgoOptions& opts,
                                       long pilot_cost_per_round, int rounds, double pilot_snr);

/// Fraction of the coherence block left for payload, times the sum rate.
double effective_throughput(double sum_rate, long overhead_symbols, long coherence_length);

/// Declarative CSI acquisition choice, as named in harness configs.
struct CsiSpec {
  Mechanism mechanism = Mechanism::kPerfect;
  // analog feedback
  double forward_snr = std::numeric_limits<double>::infinity();  // linear
  double reverse_snr = std::numeric_limits<double>::infinity();
  int training_reuse = 1;
  bool snr_tracks_operating = false;  // both link SNRs follow tx_power/noise_var
  // reciprocity
  int rounds = 0;
  long pilot_cost_per_round = 0;
  double pilot_snr = std::numeric_limits<double>::infinity();
};

Mechanism mechanism_from_string(const std::string& name);

}  // namespace iasim::csimodel
