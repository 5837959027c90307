// SPDX-License-Identifier: Apache-2.0

#include "iasim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "iasim/linkeval.hpp"
#include "iasim/rng.hpp"

namespace iasim::partition {

void Partition::canonicalize() {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });
}

int Partition::user_count() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

int Partition::max_group_size() const {
  size_t best = 0;
  for (const auto& g : groups) best = std::max(best, g.size());
  return static_cast<int>(best);
}

double Partition::mean_group_size() const {
  if (groups.empty()) return 0.0;
  return static_cast<double>(user_count()) / static_cast<double>(groups.size());
}

std::string to_string(const Partition& p) {
  std::string out;
  for (size_t g = 0; g < p.groups.size(); ++g) {
    if (g > 0) out += '|';
    out += '{';
    for (size_t m = 0; m < p.groups[g].size(); ++m) {
      if (m > 0) out += ',';
      out += std::to_string(p.groups[g][m] + 1);  // printed 1-based
    }
    out += '}';
  }
  return out;
}

std::vector<Partition> enumerate_partitions(int k) {
  if (k < 1) throw ContractViolation("enumerate_partitions: K must be >= 1");
  if (k > 10) throw SizeLimit("enumerate_partitions: K > 10 not supported");

  // Restricted growth strings: rgs[0] = 0, rgs[i] <= max(rgs[0..i-1]) + 1.
  std::vector<Partition> out;
  std::vector<int> rgs(static_cast<size_t>(k), 0);
  auto emit = [&]() {
    const int ngroups = *std::max_element(rgs.begin(), rgs.end()) + 1;
    Partition p;
    p.groups.resize(static_cast<size_t>(ngroups));
    for (int u = 0; u < k; ++u) {
      p.groups[static_cast<size_t>(rgs[static_cast<size_t>(u)])].push_back(u);
    }
    out.push_back(std::move(p));
  };
  const std::function<void(int, int)> walk = [&](int pos, int max_so_far) {
    if (pos == k) {
      emit();
      return;
    }
    for (int v = 0; v <= max_so_far + 1; ++v) {
      rgs[static_cast<size_t>(pos)] = v;
      walk(pos + 1, std::max(max_so_far, v));
    }
  };
  walk(1, 0);
  return out;
}

GroupEvaluator::GroupEvaluator(const ChannelSet& truth, csimodel::CsiSpec csi,
                               precode::AlgoSpec algo, uint64_t seed)
    : truth_(truth),
      csi_(pipeline::resolve_csi(csi, truth.config())),
      algo_(std::move(algo)),
      seed_(seed),
      estimated_(truth) {
  if (algo_.algorithm == precode::Algorithm::kClosedFormIa ||
      algo_.algorithm == precode::Algorithm::kTdma) {
    throw ConfigError("partition: group algorithm must be iterative "
                      "(min_leakage, max_sinr or wmmse)");
  }
  // CSI distortion is drawn once per link on the full network so a link sees
  // the same estimate in every group containing it.
  if (csi_.mechanism == csimodel::Mechanism::kAnalogFeedback) {
    estimated_ = csimodel::apply_analog_feedback(truth_, csi_.forward_snr, csi_.reverse_snr,
                                                 csi_.training_reuse, seed_)
                     .estimated;
  }
}

int group_stream_count(const NetworkConfig& cfg, const std::vector<int>& group) {
  int min_nt = cfg.tx_antennas[static_cast<size_t>(group[0])];
  int min_nr = cfg.rx_antennas[static_cast<size_t>(group[0])];
  for (int u : group) {
    min_nt = std::min(min_nt, cfg.tx_antennas[static_cast<size_t>(u)]);
    min_nr = std::min(min_nr, cfg.rx_antennas[static_cast<size_t>(u)]);
  }
  // Proper-system bound for the group: smaller clusters align more streams.
  return (min_nt + min_nr) / (static_cast<int>(group.size()) + 1);
}

const GroupEvaluator::GroupEval& GroupEvaluator::eval(const std::vector<int>& group) {
  uint32_t key = 0;
  for (int u : group) key |= 1u << u;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const NetworkConfig& cfg = truth_.config();
  GroupEval ev;
  if (group.size() == 1) {
    // Solo transmission; direct-link training cost is the same constant for
    // every partition and is left out of the comparison.
    ev.rate = precode::waterfill(truth_.h(group[0], group[0]), cfg.tx_power, cfg.noise_var)
                  .capacity_bits;
    ev.overhead = 0;
    return memo_.emplace(key, std::move(ev)).first->second;
  }

  NetworkConfig sub_cfg = cfg.subset(group);
  const int d_group = group_stream_count(cfg, group);
  if (d_group >= 1) {
    for (size_t m = 0; m < group.size(); ++m) {
      sub_cfg.streams[m] = std::min(
          d_group, std::min(sub_cfg.tx_antennas[m], sub_cfg.rx_antennas[m]));
    }
  }
  if (d_group < 1 ||
      precode::check_feasibility(sub_cfg) == precode::Feasibility::kInfeasible) {
    // Intra-group TDMA fallback keeps the search space total.
    double acc = 0.0;
    for (int u : group) {
      acc += precode::waterfill(truth_.h(u, u), cfg.tx_power, cfg.noise_var).capacity_bits;
    }
    ev.rate = acc / static_cast<double>(group.size());
    ev.overhead = 0;
    return memo_.emplace(key, std::move(ev)).first->second;
  }

  const ChannelSet sub_truth = truth_.subset(group).with_streams(sub_cfg.streams);
  csimodel::CsiSpec sub_csi = csi_;
  if (sub_csi.mechanism == csimodel::Mechanism::kReciprocity) {
    // One precoded pilot per antenna per direction and round.
    long per_round = 0;
    for (int u : group) {
      per_round += cfg.tx_antennas[static_cast<size_t>(u)] +
                   cfg.rx_antennas[static_cast<size_t>(u)];
    }
    sub_csi.pilot_cost_per_round = per_round;
    const auto outcome = pipeline::run_design(sub_truth, sub_csi, algo_, seed_);
    ev.rate = outcome.sum_rate;
    ev.overhead = outcome.overhead_symbols;
  } else {
    ev.overhead = sub_csi.mechanism == csimodel::Mechanism::kAnalogFeedback
                      ? csimodel::analog_feedback_overhead(sub_cfg, sub_csi.training_reuse)
                      : 0;
    const ChannelSet sub_est = estimated_.subset(group).with_streams(sub_cfg.streams);
    precode::AlgoOptions opts = algo_.options;
    opts.seed = seed_;
    if (algo_.algorithm == precode::Algorithm::kWmmse) {
      const auto res = precode::wmmse_sum_rate(sub_est, opts);
      ev.rate = linkeval::sum_rate_raw(sub_truth, res.precoders, &res.combiners).sum_rate;
    } else if (algo_.algorithm == precode::Algorithm::kMaxSinr) {
      const auto sol = precode::max_sinr(sub_est, opts);
      ev.rate = linkeval::sum_rate(sub_truth, sol.precoders, &sol.combiners).sum_rate;
    } else {
      const auto res = precode::min_leakage(sub_est, opts);
      ev.rate = linkeval::sum_rate(sub_truth, res.precoders, &res.combiners).sum_rate;
    }
  }
  return memo_.emplace(key, std::move(ev)).first->second;
}

PartitionScore score_partition(const Partition& p, GroupEvaluator& groups, long coherence_len) {
  if (coherence_len < 1) throw ContractViolation("score_partition: coherence length < 1");
  Partition canon = p;
  canon.canonicalize();
  if (canon.user_count() != groups.config().users) {
    throw ContractViolation("score_partition: partition must cover every user");
  }
  PartitionScore out;
  const double g_count = static_cast<double>(canon.groups.size());
  for (const auto& g : canon.groups) {
    const auto& ev = groups.eval(g);
    const double fraction =
        std::max(0.0, 1.0 - static_cast<double>(ev.overhead) / static_cast<double>(coherence_len));
    out.effective_sum_rate += (1.0 / g_count) * fraction * ev.rate;
    out.per_group_rate.push_back(ev.rate);
    out.per_group_overhead.push_back(ev.overhead);
  }
  out.partition = std::move(canon);
  return out;
}

PartitionScore score_partition(const Partition& p, const ChannelSet& channels,
                               long coherence_len, const csimodel::CsiSpec& csi,
                               const precode::AlgoSpec& algo, uint64_t seed) {
  GroupEvaluator groups(channels, csi, algo, seed);
  return score_partition(p, groups, coherence_len);
}

PartitionScore best_partition_exhaustive(GroupEvaluator& groups, long coherence_len) {
  const int k = groups.config().users;
  const auto all = enumerate_partitions(k);
  std::optional<PartitionScore> best;
  for (const auto& p : all) {
    PartitionScore s = score_partition(p, groups, coherence_len);
    if (!best.has_value()) {
      best = std::move(s);
      continue;
    }
    const bool better =
        s.effective_sum_rate > best->effective_sum_rate ||
        (s.effective_sum_rate == best->effective_sum_rate &&
         (s.partition.groups.size() < best->partition.groups.size() ||
          (s.partition.groups.size() == best->partition.groups.size() &&
           s.partition.groups < best->partition.groups)));
    if (better) best = std::move(s);
  }
  return *best;
}

Eigen::MatrixXd pathloss_table(const NetworkConfig& config) {
  Eigen::MatrixXd g(config.users, config.users);
  for (int i = 0; i < config.users; ++i) {
    for (int l = 0; l < config.users; ++l) {
      g(i, l) = netmodel::pathloss(config, i, l);
    }
  }
  return g;
}

namespace {

/// Expected-rate surrogate on long-term gains only: every user transmits all
/// the time, intra-group interference is removed by alignment, out-of-group
/// interference is treated as noise, and each group discounts its CSI
/// overhead. Solo users keep all min(nt, nr) spatial modes.
double pathloss_proxy_score(const Partition& p, const Eigen::MatrixXd& gains,
                            const NetworkConfig& cfg, long coherence_len,
                            const csimodel::CsiSpec& csi) {
  double total = 0.0;
  for (const auto& g : p.groups) {
    long oh = 0;
    if (g.size() > 1) {
      if (csi.mechanism == csimodel::Mechanism::kAnalogFeedback) {
        oh = csimodel::analog_feedback_overhead(cfg.subset(g), csi.training_reuse);
      } else if (csi.mechanism == csimodel::Mechanism::kReciprocity) {
        long per_round = 0;
        for (int u : g) {
          per_round += cfg.tx_antennas[static_cast<size_t>(u)] +
                       cfg.rx_antennas[static_cast<size_t>(u)];
        }
        oh = per_round * csi.rounds;
      }
    }
    const double fraction =
        std::max(0.0, 1.0 - static_cast<double>(oh) / static_cast<double>(coherence_len));
    double group_rate = 0.0;
    for (int i : g) {
      const auto ui = static_cast<size_t>(i);
      const double d_hat =
          g.size() == 1
              ? std::min(cfg.tx_antennas[ui], cfg.rx_antennas[ui])
              : std::min(group_stream_count(cfg, g),
                         std::min(cfg.tx_antennas[ui], cfg.rx_antennas[ui]));
      double out_interf = 0.0;
      for (int l = 0; l < cfg.users; ++l) {
        if (std::find(g.begin(), g.end(), l) != g.end()) continue;
        out_interf += cfg.tx_power * gains(i, l);
      }
      const double sinr = (cfg.tx_power * gains(i, i) / d_hat) / (cfg.noise_var + out_interf);
      group_rate += d_hat * std::log2(1.0 + sinr);
    }
    total += fraction * group_rate;
  }
  return total;
}

double coupling(const std::vector<int>& a, const std::vector<int>& b,
                const Eigen::MatrixXd& gains) {
  double acc = 0.0;
  for (int i : a) {
    for (int l : b) {
      acc += gains(i, l) + gains(l, i);
    }
  }
  return acc;
}

}  // namespace

Partition greedy_grouping(const Eigen::MatrixXd& pathloss_gains, const NetworkConfig& config,
                          long coherence_len, const csimodel::CsiSpec& csi) {
  if (pathloss_gains.rows() != config.users || pathloss_gains.cols() != config.users) {
    throw ContractViolation("greedy_grouping: gain table must be K x K");
  }
  Partition p;
  for (int u = 0; u < config.users; ++u) p.groups.push_back({u});

  double current = pathloss_proxy_score(p, pathloss_gains, config, coherence_len, csi);
  bool improved = true;
  while (improved && p.groups.size() > 1) {
    improved = false;
    // Candidate merges ranked by inter-group coupling.
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t a = 0; a < p.groups.size(); ++a) {
      for (size_t b = a + 1; b < p.groups.size(); ++b) {
        pairs.emplace_back(a, b);
      }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
      const double cx = coupling(p.groups[x.first], p.groups[x.second], pathloss_gains);
      const double cy = coupling(p.groups[y.first], p.groups[y.second], pathloss_gains);
      if (cx != cy) return cx > cy;
      return x < y;
    });
    for (const auto& [a, b] : pairs) {
      std::vector<int> merged = p.groups[a];
      merged.insert(merged.end(), p.groups[b].begin(), p.groups[b].end());
      std::sort(merged.begin(), merged.end());
      if (group_stream_count(config, merged) < 1) continue;  // cannot align
      Partition trial;
      for (size_t g = 0; g < p.groups.size(); ++g) {
        if (g == a || g == b) continue;
        trial.groups.push_back(p.groups[g]);
      }
      trial.groups.push_back(std::move(merged));
      trial.canonicalize();
      const double score =
          pathloss_proxy_score(trial, pathloss_gains, config, coherence_len, csi);
      if (score > current + 1e-12) {
        p = std::move(trial);
        current = score;
        improved = true;
        break;
      }
    }
  }
  p.canonicalize();
  return p;
}

Partition geographic_grouping(const NetworkConfig& config, int group_size_target,
                              uint64_t seed) {
  if (!config.has_positions()) {
    throw ContractViolation("geographic_grouping: positions required");
  }
  if (group_size_target < 1) {
    throw ContractViolation("geographic_grouping: target must be >= 1");
  }
  const int k = config.users;
  const int n_clusters = (k + group_size_target - 1) / group_size_target;

  std::vector<netmodel::Position> mid(static_cast<size_t>(k));
  for (int u = 0; u < k; ++u) {
    const auto& tx = (*config.tx_positions)[static_cast<size_t>(u)];
    const auto& rx = (*config.rx_positions)[static_cast<size_t>(u)];
    mid[static_cast<size_t>(u)] = {0.5 * (tx.x + rx.x), 0.5 * (tx.y + rx.y)};
  }

  const auto dist2 = [&](const netmodel::Position& a, const netmodel::Position& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
  };

  // Seeded first centroid, then farthest-point spread.
  rng::Substream stream(seed, rng::StreamDomain::kGeographic, 0);
  std::vector<netmodel::Position> centroids;
  centroids.push_back(mid[static_cast<size_t>(stream.next_u64() % static_cast<uint64_t>(k))]);
  while (static_cast<int>(centroids.size()) < n_clusters) {
    int far_idx = 0;
    double far_d = -1.0;
    for (int u = 0; u < k; ++u) {
      double nearest = dist2(mid[static_cast<size_t>(u)], centroids[0]);
      for (const auto& c : centroids) {
        nearest = std::min(nearest, dist2(mid[static_cast<size_t>(u)], c));
      }
      if (nearest > far_d) {
        far_d = nearest;
        far_idx = u;
      }
    }
    centroids.push_back(mid[static_cast<size_t>(far_idx)]);
  }

  std::vector<int> assign(static_cast<size_t>(k), -1);
  for (int pass = 0; pass < 64; ++pass) {
    // Capacity-bounded assignment, most-constrained points first.
    std::vector<int> order(static_cast<size_t>(k));
    for (int u = 0; u < k; ++u) order[static_cast<size_t>(u)] = u;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto spread = [&](int u) {
        double best = 1e300, second = 1e300;
        for (const auto& c : centroids) {
          const double d = dist2(mid[static_cast<size_t>(u)], c);
          if (d < best) {
            second = best;
            best = d;
          } else {
            second = std::min(second, d);
          }
        }
        return second - best;
      };
      const double sa = spread(a), sb = spread(b);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    std::vector<int> load(static_cast<size_t>(n_clusters), 0);
    std::vector<int> next(static_cast<size_t>(k), -1);
    for (int u : order) {
      int best_c = -1;
      double best_d = 1e300;
      for (int c = 0; c < n_clusters; ++c) {
        if (load[static_cast<size_t>(c)] >= group_size_target) continue;
        const double d = dist2(mid[static_cast<size_t>(u)], centroids[static_cast<size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      next[static_cast<size_t>(u)] = best_c;
      ++load[static_cast<size_t>(best_c)];
    }
    const bool stable = next == assign;
    assign = std::move(next);
    if (stable) break;
    for (int c = 0; c < n_clusters; ++c) {
      double sx = 0.0, sy = 0.0;
      int n = 0;
      for (int u = 0; u < k; ++u) {
        if (assign[static_cast<size_t>(u)] != c) continue;
        sx += mid[static_cast<size_t>(u)].x;
        sy += mid[static_cast<size_t>(u)].y;
        ++n;
      }
      if (n > 0) centroids[static_cast<size_t>(c)] = {sx / n, sy / n};
    }
  }

  Partition p;
  p.groups.resize(static_cast<size_t>(n_clusters));
  for (int u = 0; u < k; ++u) {
    p.groups[static_cast<size_t>(assign[static_cast<size_t>(u)])].push_back(u);
  }
  std::erase_if(p.groups, [](const std::vector<int>& g) { return g.empty(); });
  p.canonicalize();
  return p;
}

}  // namespace iasim::partition
