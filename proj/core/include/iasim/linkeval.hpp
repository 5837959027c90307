// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "iasim/precode.hpp"

namespace iasim::linkeval {

using netmodel::ChannelSet;
using netmodel::NetworkConfig;
using precode::CombinerSet;
using precode::PrecoderSet;

/// Metrics of one (channels, precoders, combiners) triple.
struct LinkMetrics {
  double leakage = 0.0;                             // residual interference after combining
  std::vector<double> per_user_rate;                // bits/s/Hz
  double sum_rate = 0.0;                            // = sum(per_user_rate)
  std::vector<std::vector<double>> per_stream_sinr; // linear, after combining
};

/// Residual interference power after combining:
/// sum_i sum_{l != i} (p_l/d_l) * ||W_i^* H_il F_l||_F^2 over mask-true links.
double leakage(const ChannelSet& channels, const PrecoderSet& f, const CombinerSet& w);

/// Rates treating all interference as Gaussian noise. Combiners, when given,
/// project every covariance onto the receive subspace first. Orthonormal
/// precoders carry implicit per-stream power tx_power/d[i].
LinkMetrics sum_rate(const ChannelSet& channels, const PrecoderSet& f,
                     const CombinerSet* w = nullptr,
                     const std::vector<CMatrix>* noise_cov = nullptr);

/// Same evaluation for precoders that already carry power (tr(V V^*) = used power).
LinkMetrics sum_rate_raw(const ChannelSet& channels, const std::vector<CMatrix>& v,
                         const CombinerSet* w = nullptr,
                         const std::vector<CMatrix>* noise_cov = nullptr);

/// Least-squares slope of rate versus log2(linear SNR); the DoF estimate.
/// Requires >= 2 ascending points, all at 20 dB or above.
double fit_dof_slope(const std::vector<double>& snr_db_points,
                     const std::vector<double>& sum_rates);

/// Receiver noise covariance: noise_cov[i] when provided, else noise_var * I.
CMatrix effective_noise(const NetworkConfig& config, const std::vector<CMatrix>& noise_cov,
                        int i);

}  // namespace iasim::linkeval
