// SPDX-License-Identifier: Apache-2.0

#include "iasim/rng.hpp"

#include <cmath>

namespace iasim::rng {

namespace {
constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key) {
  std::array<uint32_t, 4> ctr = counter;
  std::array<uint32_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return ctr;
}

std::array<uint32_t, 4> Substream::next_block() {
  const std::array<uint32_t, 4> ctr = {draw_++, a_, b_, domain_};
  return philox4x32(ctr, key_);
}

uint64_t Substream::next_u64() {
  const auto blk = next_block();
  return (static_cast<uint64_t>(blk[0]) << 32) | blk[1];
}

double Substream::uniform() {
  if (has_pending_uniform_) {
    has_pending_uniform_ = false;
    return pending_uniform_;
  }
  const auto blk = next_block();
  const uint64_t u0 = (static_cast<uint64_t>(blk[0]) << 32) | blk[1];
  const uint64_t u1 = (static_cast<uint64_t>(blk[2]) << 32) | blk[3];
  pending_uniform_ = static_cast<double>(u1 >> 11) * 0x1.0p-53;
  has_pending_uniform_ = true;
  return static_cast<double>(u0 >> 11) * 0x1.0p-53;
}

double Substream::gaussian() {
  if (has_pending_) {
    has_pending_ = false;
    return pending_;
  }
  const auto blk = next_block();
  const uint64_t u0 = (static_cast<uint64_t>(blk[0]) << 32) | blk[1];
  const uint64_t u1 = (static_cast<uint64_t>(blk[2]) << 32) | blk[3];
  // 1 - u in (0, 1] keeps the log argument strictly positive.
  const double r = std::sqrt(-2.0 * std::log(1.0 - static_cast<double>(u0 >> 11) * 0x1.0p-53));
  const double theta = kTwoPi * (static_cast<double>(u1 >> 11) * 0x1.0p-53);
  pending_ = r * std::sin(theta);
  has_pending_ = true;
  return r * std::cos(theta);
}

std::complex<double> Substream::complex_gaussian() {
  const auto blk = next_block();
  const uint64_t u0 = (static_cast<uint64_t>(blk[0]) << 32) | blk[1];
  const uint64_t u1 = (static_cast<uint64_t>(blk[2]) << 32) | blk[3];
  const double r = std::sqrt(-2.0 * std::log(1.0 - static_cast<double>(u0 >> 11) * 0x1.0p-53));
  const double theta = kTwoPi * (static_cast<double>(u1 >> 11) * 0x1.0p-53);
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  return {r * std::cos(theta) * inv_sqrt2, r * std::sin(theta) * inv_sqrt2};
}

uint64_t derive_trial_seed(uint64_t master_seed, uint32_t sweep_index, uint32_t trial_index) {
  const std::array<uint32_t, 4> ctr = {sweep_index, trial_index, 0,
                                       static_cast<uint32_t>(StreamDomain::kTrialDerive)};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(master_seed),
                                       static_cast<uint32_t>(master_seed >> 32)};
  const auto blk = philox4x32(ctr, key);
  return (static_cast<uint64_t>(blk[0]) << 32) | blk[1];
}

}  // namespace iasim::rng
