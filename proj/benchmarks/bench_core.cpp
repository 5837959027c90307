// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "iasim/linkeval.hpp"
#include "iasim/partition.hpp"
#include "iasim/rng.hpp"

namespace {

using namespace iasim;

netmodel::ChannelSet three_user_channels(uint64_t seed) {
  const auto cfg = netmodel::NetworkConfig::symmetric(3, 2, 2, 1);
  return netmodel::generate_channels(cfg, netmodel::FadingProcess{}, seed);
}

void BM_GenerateChannels3x2(benchmark::State& state) {
  const auto cfg = netmodel::NetworkConfig::symmetric(3, 2, 2, 1);
  uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(netmodel::generate_channels(cfg, netmodel::FadingProcess{}, seed++));
  }
}
BENCHMARK(BM_GenerateChannels3x2);

void BM_HermitianEig4(benchmark::State& state) {
  rng::Substream s(3, rng::StreamDomain::kTest, 0);
  CMatrix g(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) g(r, c) = s.complex_gaussian();
  }
  const CMatrix a = 0.5 * (g + g.adjoint());
  for (auto _ : state) {
    benchmark::DoNotOptimize(numkit::hermitian_eig(a));
  }
}
BENCHMARK(BM_HermitianEig4);

void BM_MinLeakage(benchmark::State& state) {
  const auto ch = three_user_channels(11);
  precode::AlgoOptions opts;
  opts.max_iters = static_cast<int>(state.range(0));
  opts.tol = 1e-300;
  for (auto _ : state) {
    benchmark::DoNotOptimize(precode::min_leakage(ch, opts));
  }
}
BENCHMARK(BM_MinLeakage)->Arg(100)->Arg(1000);

void BM_MaxSinr(benchmark::State& state) {
  const auto ch = three_user_channels(12);
  precode::AlgoOptions opts;
  opts.max_iters = static_cast<int>(state.range(0));
  opts.tol = 1e-300;
  for (auto _ : state) {
    benchmark::DoNotOptimize(precode::max_sinr(ch, opts));
  }
}
BENCHMARK(BM_MaxSinr)->Arg(100);

void BM_Wmmse(benchmark::State& state) {
  const auto ch = three_user_channels(13);
  precode::AlgoOptions opts;
  opts.max_iters = 50;
  opts.tol = 1e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(precode::wmmse_sum_rate(ch, opts));
  }
}
BENCHMARK(BM_Wmmse);

void BM_BestPartitionK6(benchmark::State& state) {
  auto cfg = netmodel::NetworkConfig::symmetric(6, 4, 4, 1);
  cfg.tx_power = 31.623;
  const auto ch = netmodel::generate_channels(cfg, netmodel::FadingProcess{}, 21);
  csimodel::CsiSpec csi;
  precode::AlgoSpec algo;
  algo.algorithm = precode::Algorithm::kMinLeakage;
  algo.options.max_iters = 100;
  algo.options.tol = 1e-8;
  for (auto _ : state) {
    partition::GroupEvaluator groups(ch, csi, algo, 21);
    benchmark::DoNotOptimize(partition::best_partition_exhaustive(groups, 1000));
  }
}
BENCHMARK(BM_BestPartitionK6);

}  // namespace

BENCHMARK_MAIN();
