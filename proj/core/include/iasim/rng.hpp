// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace iasim::rng {

// Counter-based generator (Philox4x32-10). Streams are addressed purely by
// (seed, domain, a, b), so any draw is reproducible regardless of generation
// order or worker count.

/// One Philox4x32-10 block: 128-bit counter + 64-bit key -> 128 output bits.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

/// Purpose tag for independent substreams sharing one master seed.
enum class StreamDomain : uint32_t {
  kChannel = 1,        // channel matrix entries, substream per (i, l) link
  kFeedbackNoise = 2,  // analog-feedback distortion, substream per link
  kPrecoderInit = 3,   // random precoder initialization, substream per user
  kPilotObsNoise = 4,  // reciprocity pilot observation noise, per (node, side)
  kGeographic = 5,     // geographic clustering start
  kTrialDerive = 6,    // per-trial seed derivation in the harness
  kTest = 7,           // scratch streams in tests and validation checks
};

/// Independent substream of uniforms / Gaussians addressed by (seed, domain, a, b).
class Substream {
 public:
  Substream(uint64_t seed, StreamDomain domain, uint32_t a, uint32_t b = 0)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        a_(a),
        b_(b),
        domain_(static_cast<uint32_t>(domain)) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal via Box-Muller (consumes one block per pair).
  double gaussian();

  /// Circularly-symmetric complex Gaussian, zero mean, unit variance:
  /// (x + jy)/sqrt(2) with x, y standard normal. One block per draw.
  std::complex<double> complex_gaussian();

  /// Raw 64-bit draw.
  uint64_t next_u64();

 private:
  std::array<uint32_t, 4> next_block();

  std::array<uint32_t, 2> key_;
  uint32_t a_, b_, domain_;
  uint32_t draw_ = 0;
  double pending_ = 0.0;
  bool has_pending_ = false;       // buffered second Box-Muller output
  double pending_uniform_ = 0.0;   // buffered second uniform of a block
  bool has_pending_uniform_ = false;
};

/// Substream id packing two small indices (e.g. a (receiver, transmitter) link).
inline uint32_t pack_pair(uint32_t hi, uint32_t lo) { return (hi << 16) | (lo & 0xffffu); }

/// Deterministic 64-bit seed for one (sweep point, trial) cell of an experiment.
uint64_t derive_trial_seed(uint64_t master_seed, uint32_t sweep_index, uint32_t trial_index);

}  // namespace iasim::rng
