// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iasim/numkit.hpp"

namespace iasim::netmodel {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

/// Static definition of a K-pair interference network.
struct NetworkConfig {
  int users = 1;                     // K transmit/receive pairs
  std::vector<int> tx_antennas;      // nt[i]
  std::vector<int> rx_antennas;      // nr[i]
  std::vector<int> streams;          // d[i] <= min(nt[i], nr[i])
  double tx_power = 1.0;             // per-user budget, linear; SNR = tx_power/noise_var
  double noise_var = 1.0;
  std::optional<std::vector<Position>> tx_positions;  // meters
  std::optional<std::vector<Position>> rx_positions;
  double pathloss_exponent = 0.0;    // gamma >= 0
  double reference_distance = 1.0;   // d0 > 0, meters
  std::vector<std::vector<bool>> connectivity;  // (i, l): link l -> receiver i modeled

  /// Uniform helper: every user gets the same antenna/stream counts, full mask.
  static NetworkConfig symmetric(int users, int nt, int nr, int d);

  bool has_positions() const { return tx_positions.has_value() && rx_positions.has_value(); }
  bool link_active(int i, int l) const { return connectivity[static_cast<size_t>(i)][static_cast<size_t>(l)]; }

  /// Validates all invariants; throws ContractViolation on the first failure.
  void validate() const;

  /// Restriction to a subset of users (indices ascending); mask and geometry carried over.
  NetworkConfig subset(const std::vector<int>& users_kept) const;
};

enum class FadingModel { kIidRayleigh, kKroneckerCorrelated };

/// Spatial fading description for one coherence block.
struct FadingProcess {
  FadingModel model = FadingModel::kIidRayleigh;
  CMatrix tx_corr;  // Hermitian PSD, unit diagonal (Kronecker model only)
  CMatrix rx_corr;
  double normalized_doppler = 0.0;  // f_d * T_s, in [0, 0.5)

  void validate() const;
};

/// Exponential correlation profile corr(a, b) = rho^|a-b|.
CMatrix exp_correlation(int n, double rho);

/// The K x K grid of per-link channel matrices of one coherence block.
/// Masked-out links hold exact zero matrices; immutable after creation.
class ChannelSet {
 public:
  ChannelSet(NetworkConfig config, std::vector<std::vector<CMatrix>> h)
      : config_(std::move(config)), h_(std::move(h)) {}

  const NetworkConfig& config() const { return config_; }
  /// Channel from transmitter l into receiver i (nr[i] x nt[l]).
  const CMatrix& h(int i, int l) const {
    return h_[static_cast<size_t>(i)][static_cast<size_t>(l)];
  }
  int users() const { return config_.users; }

  /// Restriction to a subset of users; channels copied, mask restricted.
  ChannelSet subset(const std::vector<int>& users_kept) const;

  /// Same channels under a different per-user stream allocation.
  ChannelSet with_streams(const std::vector<int>& streams) const;

  /// Entry-identical comparison (determinism checks).
  bool identical_to(const ChannelSet& other) const;

 private:
  NetworkConfig config_;
  std::vector<std::vector<CMatrix>> h_;
};

/// Distance-based link gain (dist/d0)^(-gamma), clamped to 1 below d0,
/// 1 everywhere when positions are absent.
double pathloss(const NetworkConfig& config, int i, int l);

/// Mask keeping links whose received interference SNR clears threshold_db;
/// the diagonal is always kept.
std::vector<std::vector<bool>> derive_connectivity(const NetworkConfig& config,
                                                   double threshold_db);

/// Draws one coherence block. Deterministic in (config, fading, seed); each
/// link has its own counter-based substream, so output is independent of
/// generation order.
ChannelSet generate_channels(const NetworkConfig& config, const FadingProcess& fading,
                             uint64_t seed);

}  // namespace iasim::netmodel
