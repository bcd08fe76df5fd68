#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsisel/cluster.hpp"
#include "wsisel/dataset.hpp"

namespace wsisel {

/// Cluster-occupancy histogram and entropy of one WSI. counts[k] is the
/// number of this group's patches assigned to cluster k; proportions are
/// the normalized counts; entropy is Shannon entropy in nats, so the
/// maximum over K clusters is ln K.
struct GroupEntropy {
  std::string group_id;
  std::vector<std::int64_t> counts;
  std::vector<double> proportions;
  double entropy = 0.0;
  std::int64_t n_patches = 0;
};

/// Groups sorted by entropy descending (ties: ascending group_id) plus
/// the high/med/low selection slices.
struct RankedSelection {
  std::vector<GroupEntropy> ordered;
  std::vector<std::string> high;
  std::vector<std::string> med;
  std::vector<std::string> low;

  /// "high", "med", "low" or "none" for a given group.
  std::string slice_of(const std::string& group_id) const;
};

/// Per-group cluster-count histograms in group first-appearance order.
/// Only counts and n_patches are filled; entropy and proportions are left
/// at their defaults.
std::vector<GroupEntropy> group_histograms(const Assignment& assignment,
                                           const FeatureTable& table, int k);

/// Same, from bare (group_id, cluster) pairs in record order.
std::vector<GroupEntropy> group_histograms(
    const std::vector<std::pair<std::string, int>>& assigned, int k);

/// H = -sum_i P(i) ln P(i) with P(i) = counts[i] / sum(counts) and the
/// 0 ln 0 := 0 convention. Throws ConfigError on an all-zero histogram.
double cluster_entropy(const std::vector<std::int64_t>& counts);

/// group_histograms with proportions and entropy filled in.
std::vector<GroupEntropy> group_entropies(const Assignment& assignment,
                                          const FeatureTable& table, int k);
std::vector<GroupEntropy> group_entropies(
    const std::vector<std::pair<std::string, int>>& assigned, int k);

/// Sort by entropy descending and slice: high = first n, low = last n,
/// med = n consecutive groups centered on rank floor((m-1)/2), shifted
/// right when n is even.
RankedSelection rank_groups(std::vector<GroupEntropy> entropies, std::size_t n);

/// The group with the highest cluster entropy.
const std::string& select_wsi(const RankedSelection& ranking);

/// NDJSON, one object per group in group order:
/// {"counts":[...],"entropy":...,"group_id":...,"n":...}
std::string entropies_to_ndjson(const std::vector<GroupEntropy>& entropies);
std::vector<GroupEntropy> entropies_from_ndjson(const std::string& text);

/// NDJSON in rank order; adds "rank" and "slice" to every object.
std::string ranking_to_ndjson(const RankedSelection& ranking);
RankedSelection ranking_from_ndjson(const std::string& text);

}  // namespace wsisel
