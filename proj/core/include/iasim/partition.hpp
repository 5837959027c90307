// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "iasim/pipeline.hpp"

namespace iasim::partition {

using netmodel::ChannelSet;
using netmodel::NetworkConfig;

/// Disjoint cover of {0..K-1} into cooperating clusters scheduled round-robin.
/// Canonical form: members ascending inside each group, groups ordered by
/// their smallest member. Printed 1-based, e.g. "{1,2,3}|{4}|{5,6}".
struct Partition {
  std::vector<std::vector<int>> groups;

  void canonicalize();
  int user_count() const;
  int max_group_size() const;
  double mean_group_size() const;  // K / group count
  bool operator==(const Partition& other) const { return groups == other.groups; }
};

std::string to_string(const Partition& p);

/// All set partitions of {0..K-1}, each exactly once, deterministic order.
/// Guarded at K <= 10 (Bell(10) = 115975).
std::vector<Partition> enumerate_partitions(int k);

struct PartitionScore {
  Partition partition;
  double effective_sum_rate = 0.0;
  std::vector<double> per_group_rate;
  std::vector<long> per_group_overhead;
};

/// Memoizes the (rate, overhead) of each cooperating group for one channel
/// realization, so partition searches share group evaluations.
///
/// Conventions: a singleton transmits solo with waterfilling over its true
/// direct channel at zero cross-CSI overhead; a group failing the feasibility
/// check falls back to intra-group TDMA (also overhead-free); any other group
/// runs the configured algorithm on its acquired CSI and is scored on the
/// true subnetwork channels.
class GroupEvaluator {
 public:
  struct GroupEval {
    double rate = 0.0;
    long overhead = 0;
  };

  GroupEvaluator(const ChannelSet& truth, csimodel::CsiSpec csi, precode::AlgoSpec algo,
                 uint64_t seed);

  const GroupEval& eval(const std::vector<int>& group);
  const NetworkConfig& config() const { return truth_.config(); }

 private:
  ChannelSet truth_;
  csimodel::CsiSpec csi_;
  precode::AlgoSpec algo_;
  uint64_t seed_;
  ChannelSet estimated_;  // full-network acquired CSI, subset per group
  std::unordered_map<uint32_t, GroupEval> memo_;
};

/// Score of one partition: each group gets time fraction 1/G and pays its CSI
/// overhead out of the coherence block.
PartitionScore score_partition(const Partition& p, GroupEvaluator& groups, long coherence_len);

/// Convenience overload building a one-shot evaluator.
PartitionScore score_partition(const Partition& p, const ChannelSet& channels,
                               long coherence_len, const csimodel::CsiSpec& csi,
                               const precode::AlgoSpec& algo, uint64_t seed);

/// Exhaustive argmax over all partitions (K <= 10); ties broken toward fewer
/// groups, then lexicographically on the canonical form.
PartitionScore best_partition_exhaustive(GroupEvaluator& groups, long coherence_len);

/// Agglomerative merging driven only by long-term pathloss gains: candidate
/// pairs ranked by inter-group coupling, a merge is kept when it improves a
/// pathloss-proxy throughput surrogate and the merged group stays IA-feasible.
Partition greedy_grouping(const Eigen::MatrixXd& pathloss_gains, const NetworkConfig& config,
                          long coherence_len, const csimodel::CsiSpec& csi);

/// Capacity-bounded clustering of link midpoints via iterative centroid
/// assignment with a deterministic seeded start.
Partition geographic_grouping(const NetworkConfig& config, int group_size_target,
                              uint64_t seed);

/// K x K long-term gain table from the config geometry.
Eigen::MatrixXd pathloss_table(const NetworkConfig& config);

}  // namespace iasim::partition
