// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "iasim/csimodel.hpp"

namespace iasim::pipeline {

using netmodel::ChannelSet;

/// Everything one (channels, csi, algorithm) run produces: the algorithm is
/// fed the acquired CSI, but rates and leakage are evaluated on the true
/// channels with the returned transmit/receive design.
struct DesignOutcome {
  double sum_rate = 0.0;      // bits/s/Hz
  double leakage = 0.0;
  long overhead_symbols = 0;
};

/// Resolves "track" semantics: link SNRs follow the operating SNR when requested.
csimodel::CsiSpec resolve_csi(const csimodel::CsiSpec& spec,
                              const netmodel::NetworkConfig& config);

/// Runs one CSI acquisition + precoding design on one channel realization.
/// seed feeds both the acquisition noise and the algorithm initialization.
DesignOutcome run_design(const ChannelSet& truth, const csimodel::CsiSpec& csi,
                         const precode::AlgoSpec& algo, uint64_t seed);

}  // namespace iasim::pipeline
