// SPDX-License-Identifier: Apache-2.0

#include "iasim/netmodel.hpp"

#include <cmath>
#include <string>

#include "iasim/rng.hpp"

namespace iasim::netmodel {

NetworkConfig NetworkConfig::symmetric(int users, int nt, int nr, int d) {
  NetworkConfig c;
  c.users = users;
  c.tx_antennas.assign(static_cast<size_t>(users), nt);
  c.rx_antennas.assign(static_cast<size_t>(users), nr);
  c.streams.assign(static_cast<size_t>(users), d);
  c.connectivity.assign(static_cast<size_t>(users),
                        std::vector<bool>(static_cast<size_t>(users), true));
  c.validate();
  return c;
}

void NetworkConfig::validate() const {
  if (users < 1) throw ContractViolation("network: users must be >= 1");
  const auto k = static_cast<size_t>(users);
  if (tx_antennas.size() != k || rx_antennas.size() != k || streams.size() != k) {
    throw ContractViolation("network: per-user array sizes must equal user count");
  }
  for (int i = 0; i < users; ++i) {
    const auto ui = static_cast<size_t>(i);
    if (tx_antennas[ui] < 1 || rx_antennas[ui] < 1 || streams[ui] < 1) {
      throw ContractViolation("network: antenna and stream counts must be >= 1");
    }
    if (streams[ui] > std::min(tx_antennas[ui], rx_antennas[ui])) {
      throw ContractViolation("network: streams exceed min(tx, rx) antennas for user " +
                              std::to_string(i + 1));
    }
  }
  if (!(tx_power > 0.0) || !(noise_var > 0.0)) {
    throw ContractViolation("network: tx_power and noise_var must be positive");
  }
  if (pathloss_exponent < 0.0) throw ContractViolation("network: pathloss exponent must be >= 0");
  if (!(reference_distance > 0.0)) {
    throw ContractViolation("network: reference distance must be positive");
  }
  if (tx_positions.has_value() != rx_positions.has_value()) {
    throw ContractViolation("network: positions must be given for both ends or neither");
  }
  if (has_positions() &&
      (tx_positions->size() != k || rx_positions->size() != k)) {
    throw ContractViolation("network: one position per transmitter and receiver required");
  }
  if (connectivity.size() != k) {
    throw ContractViolation("network: connectivity mask must be K x K");
  }
  for (int i = 0; i < users; ++i) {
    if (connectivity[static_cast<size_t>(i)].size() != k) {
      throw ContractViolation("network: connectivity mask must be K x K");
    }
    if (!link_active(i, i)) {
      throw ContractViolation("network: connectivity diagonal must be true");
    }
  }
}

NetworkConfig NetworkConfig::subset(const std::vector<int>& users_kept) const {
  NetworkConfig out;
  out.users = static_cast<int>(users_kept.size());
  out.tx_power = tx_power;
  out.noise_var = noise_var;
  out.pathloss_exponent = pathloss_exponent;
  out.reference_distance = reference_distance;
  for (int u : users_kept) {
    const auto su = static_cast<size_t>(u);
    out.tx_antennas.push_back(tx_antennas[su]);
    out.rx_antennas.push_back(rx_antennas[su]);
    out.streams.push_back(streams[su]);
  }
  if (has_positions()) {
    std::vector<Position> tx, rx;
    for (int u : users_kept) {
      tx.push_back((*tx_positions)[static_cast<size_t>(u)]);
      rx.push_back((*rx_positions)[static_cast<size_t>(u)]);
    }
    out.tx_positions = std::move(tx);
    out.rx_positions = std::move(rx);
  }
  out.connectivity.assign(users_kept.size(), std::vector<bool>(users_kept.size(), false));
  for (size_t a = 0; a < users_kept.size(); ++a) {
    for (size_t b = 0; b < users_kept.size(); ++b) {
      out.connectivity[a][b] = link_active(users_kept[a], users_kept[b]);
    }
  }
  out.validate();
  return out;
}

void FadingProcess::validate() const {
  if (!(normalized_doppler >= 0.0) || normalized_doppler >= 0.5) {
    throw ContractViolation("fading: normalized doppler must lie in [0, 0.5)");
  }
  if (model == FadingModel::kKroneckerCorrelated) {
    for (const CMatrix* corr : {&tx_corr, &rx_corr}) {
      if (corr->rows() != corr->cols() || corr->rows() < 1) {
        throw ContractViolation("fading: correlation matrices must be square");
      }
      if (numkit::hermitian_defect(*corr) > 1e-10) {
        throw ContractViolation("fading: correlation matrices must be Hermitian");
      }
      for (Eigen::Index i = 0; i < corr->rows(); ++i) {
        if (std::abs((*corr)(i, i) - 1.0) > 1e-8) {
          throw ContractViolation("fading: correlation matrices must have unit diagonal");
        }
      }
      const auto eig = numkit::hermitian_eig(*corr);
      if (eig.eigenvalues.minCoeff() < -1e-10) {
        throw ContractViolation("fading: correlation matrices must be PSD");
      }
    }
  }
}

CMatrix exp_correlation(int n, double rho) {
  CMatrix r(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      r(a, b) = std::pow(rho, std::abs(a - b));
    }
  }
  return r;
}

double pathloss(const NetworkConfig& config, int i, int l) {
  if (!config.has_positions()) return 1.0;
  const Position& rx = (*config.rx_positions)[static_cast<size_t>(i)];
  const Position& tx = (*config.tx_positions)[static_cast<size_t>(l)];
  const double dist = std::hypot(rx.x - tx.x, rx.y - tx.y);
  if (dist <= config.reference_distance) return 1.0;
  return std::pow(dist / config.reference_distance, -config.pathloss_exponent);
}

std::vector<std::vector<bool>> derive_connectivity(const NetworkConfig& config,
                                                   double threshold_db) {
  if (!config.has_positions()) {
    throw ContractViolation("derive_connectivity: positions required");
  }
  const double threshold = std::pow(10.0, threshold_db / 10.0);
  std::vector<std::vector<bool>> mask(static_cast<size_t>(config.users),
                                      std::vector<bool>(static_cast<size_t>(config.users), false));
  for (int i = 0; i < config.users; ++i) {
    for (int l = 0; l < config.users; ++l) {
      const double link_snr = pathloss(config, i, l) * config.tx_power / config.noise_var;
      mask[static_cast<size_t>(i)][static_cast<size_t>(l)] = (i == l) || link_snr >= threshold;
    }
  }
  return mask;
}

ChannelSet generate_channels(const NetworkConfig& config, const FadingProcess& fading,
                             uint64_t seed) {
  config.validate();
  fading.validate();

  const bool correlated = fading.model == FadingModel::kKroneckerCorrelated;
  CMatrix tx_sqrt, rx_sqrt;
  bool apply_corr = false;
  if (correlated) {
    // Identity correlation reproduces the iid path bit-for-bit.
    if (!fading.tx_corr.isIdentity(0.0) || !fading.rx_corr.isIdentity(0.0)) {
      tx_sqrt = numkit::hermitian_sqrt(fading.tx_corr);
      rx_sqrt = numkit::hermitian_sqrt(fading.rx_corr);
      apply_corr = true;
    }
  }

  std::vector<std::vector<CMatrix>> h(static_cast<size_t>(config.users));
  for (int i = 0; i < config.users; ++i) {
    auto& row = h[static_cast<size_t>(i)];
    row.resize(static_cast<size_t>(config.users));
    const int nr = config.rx_antennas[static_cast<size_t>(i)];
    for (int l = 0; l < config.users; ++l) {
      const int nt = config.tx_antennas[static_cast<size_t>(l)];
      CMatrix& m = row[static_cast<size_t>(l)];
      m = CMatrix::Zero(nr, nt);
      if (!config.link_active(i, l)) continue;

      rng::Substream stream(seed, rng::StreamDomain::kChannel,
                            rng::pack_pair(static_cast<uint32_t>(i), static_cast<uint32_t>(l)));
      for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nt; ++c) {
          m(r, c) = stream.complex_gaussian();  // row-major fill order
        }
      }
      if (apply_corr) {
        if (rx_sqrt.rows() != nr || tx_sqrt.rows() != nt) {
          throw ContractViolation(
              "generate_channels: correlation matrix sizes must match antenna counts");
        }
        m = rx_sqrt * m * tx_sqrt;
      }
      const double gain = pathloss(config, i, l);
      if (gain != 1.0) m *= std::sqrt(gain);
    }
  }
  return ChannelSet(config, std::move(h));
}

ChannelSet ChannelSet::subset(const std::vector<int>& users_kept) const {
  NetworkConfig sub = config_.subset(users_kept);
  std::vector<std::vector<CMatrix>> h(users_kept.size());
  for (size_t a = 0; a < users_kept.size(); ++a) {
    h[a].resize(users_kept.size());
    for (size_t b = 0; b < users_kept.size(); ++b) {
      if (sub.connectivity[a][b]) {
        h[a][b] = this->h(users_kept[a], users_kept[b]);
      } else {
        h[a][b] = CMatrix::Zero(sub.rx_antennas[a], sub.tx_antennas[b]);
      }
    }
  }
  return ChannelSet(std::move(sub), std::move(h));
}

ChannelSet ChannelSet::with_streams(const std::vector<int>& streams) const {
  NetworkConfig cfg = config_;
  cfg.streams = streams;
  cfg.validate();
  return ChannelSet(std::move(cfg), h_);
}

bool ChannelSet::identical_to(const ChannelSet& other) const {
  if (users() != other.users()) return false;
  for (int i = 0; i < users(); ++i) {
    for (int l = 0; l < users(); ++l) {
      const CMatrix& a = h(i, l);
      const CMatrix& b = other.h(i, l);
      if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          if (a(r, c) != b(r, c)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace iasim::netmodel
