// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iasim/netmodel.hpp"

namespace iasim::precode {

using netmodel::ChannelSet;
using netmodel::NetworkConfig;

/// Per-user transmit precoders with orthonormal columns (nt[i] x d[i]).
/// Power is carried separately as tx_power/d[i] per stream.
struct PrecoderSet {
  std::vector<CMatrix> f;
};

/// Per-user receive combiners with orthonormal columns (nr[i] x d[i]).
struct CombinerSet {
  std::vector<CMatrix> w;
};

struct IaSolution {
  PrecoderSet precoders;
  CombinerSet combiners;
};

/// Shared knobs for the iterative designs.
struct AlgoOptions {
  int max_iters = 2000;
  double tol = 1e-10;   // stop when the objective change falls below this
  uint64_t seed = 1;    // initialization substreams
  std::vector<CMatrix> noise_cov;  // optional per-receiver colored noise, empty = white
};

enum class Feasibility { kFeasible, kInfeasible, kUnknown };

/// Precoding strategies selectable by name in the harness config.
enum class Algorithm { kClosedFormIa, kMinLeakage, kMaxSinr, kWmmse, kTdma };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

/// Proper-system stream count check d <= (nt + nr)/(K + 1) for fully connected
/// symmetric configs; anything non-symmetric or partially connected is kUnknown.
Feasibility check_feasibility(const NetworkConfig& config);

const char* to_string(Feasibility f);

/// Orthonormalized seeded-Gaussian precoder start shared by all iterative designs.
PrecoderSet random_precoders(const NetworkConfig& config, uint64_t seed);

/// Direct 3-user alignment construction: the first precoder spans an invariant
/// subspace of the round-trip channel map, the other two follow from the
/// pairwise alignment equations, and each combiner takes the interference-free
/// receive subspace.
IaSolution closed_form_ia_3user(const ChannelSet& channels);

struct LeakageDescentResult {
  PrecoderSet precoders;
  CombinerSet combiners;
  std::vector<double> leakage_trace;  // after each full iteration, non-increasing
};

/// Alternating least-interference subspace selection on the forward and
/// reciprocal networks.
LeakageDescentResult min_leakage(const ChannelSet& channels, const AlgoOptions& opts);

/// Per-stream SINR-maximizing update with MMSE-direction combiners; iteration
/// capped, no monotonicity guarantee. Outputs re-orthonormalized.
IaSolution max_sinr(const ChannelSet& channels, const AlgoOptions& opts);

struct WmmseResult {
  std::vector<CMatrix> precoders;   // carry power: tr(V V^*) <= tx_power per user
  CombinerSet combiners;            // orthonormalized MMSE receive bases
  std::vector<double> rate_trace;   // sum rate per iteration, non-decreasing
  std::vector<double> per_user_power;
};

/// Weighted-MMSE sum-rate design; per-user power constraints enforced by
/// bisection on the Lagrange multiplier. Throws NumericalFailure if a
/// multiplier bracket cannot be found.
WmmseResult wmmse_sum_rate(const ChannelSet& channels, const AlgoOptions& opts);

struct WaterfillResult {
  double capacity_bits = 0.0;        // bits/s/Hz
  std::vector<double> mode_power;    // per singular mode
  CMatrix precoder;                  // carries power, columns = right singular vectors
};

/// Single-user waterfilling over one MIMO channel.
WaterfillResult waterfill(const CMatrix& h, double power, double noise_var);

struct TdmaSchedule {
  double time_share = 1.0;             // 1/K
  std::vector<double> solo_rate;       // full-power waterfilling rate per user
  std::vector<CMatrix> precoders;      // per-user waterfilling precoders (carry power)
  double rate() const;                 // time_share * sum(solo_rate)
};

/// Round-robin single-user baseline: full-power waterfilling on each direct link.
TdmaSchedule tdma_baseline(const ChannelSet& channels);

/// An algorithm choice bundled with its options, as named in harness configs.
struct AlgoSpec {
  Algorithm algorithm = Algorithm::kMinLeakage;
  AlgoOptions options;
};

namespace detail {

/// Additive perturbation applied to an interference covariance before the
/// subspace selection; models noisy pilot-based covariance estimation.
/// side: 0 = receiver (combiner step), 1 = transmitter (precoder step).
using CovarianceNoise = std::function<CMatrix(int node, int side, int iter, Eigen::Index dim)>;

struct DescentHooks {
  CovarianceNoise cov_noise;          // null = exact covariances
  bool select_most_dominant = false;  // validation mutation hook: flips the
                                      // subspace-selection sign so the
                                      // monotonicity check must fail
};

/// Shared alternating-minimization core behind min_leakage and the
/// over-the-air reciprocity loop; with null hooks both produce bit-identical
/// iterate sequences for the same options.
LeakageDescentResult leakage_descent(const ChannelSet& channels, const AlgoOptions& opts,
                                     const DescentHooks* hooks);

}  // namespace detail
}  // namespace iasim::precode
