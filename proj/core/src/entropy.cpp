#include "wsisel/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace wsisel {

using json = nlohmann::json;

std::string RankedSelection::slice_of(const std::string& group_id) const {
  auto contains = [&](const std::vector<std::string>& ids) {
    return std::find(ids.begin(), ids.end(), group_id) != ids.end();
  };
  if (contains(high)) return "high";
  if (contains(med)) return "med";
  if (contains(low)) return "low";
  return "none";
}

std::vector<GroupEntropy> group_histograms(
    const std::vector<std::pair<std::string, int>>& assigned, int k) {
  if (k <= 0) throw ConfigError("group_histograms: K must be positive");

  std::vector<GroupEntropy> out;
  std::unordered_map<std::string, std::size_t> position;
  for (const auto& [group_id, cluster] : assigned) {
    if (cluster < 0 || cluster >= k) {
      throw ConfigError("group_histograms: cluster label " +
                        std::to_string(cluster) + " out of range for K=" +
                        std::to_string(k));
    }
    auto [it, inserted] = position.try_emplace(group_id, out.size());
    if (inserted) {
      GroupEntropy ge;
      ge.group_id = group_id;
      ge.counts.assign(k, 0);
      out.push_back(std::move(ge));
    }
    GroupEntropy& ge = out[it->second];
    ++ge.counts[cluster];
    ++ge.n_patches;
  }
  return out;
}

std::vector<GroupEntropy> group_histograms(const Assignment& assignment,
                                           const FeatureTable& table, int k) {
  if (assignment.labels.size() != table.size()) {
    throw ConfigError("group_histograms: assignment has " +
                      std::to_string(assignment.labels.size()) +
                      " labels for " + std::to_string(table.size()) + " records");
  }
  std::vector<std::pair<std::string, int>> assigned;
  assigned.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    assigned.emplace_back(table.record(i).group_id, assignment.labels[i]);
  }
  return group_histograms(assigned, k);
}

double cluster_entropy(const std::vector<std::int64_t>& counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw ConfigError("cluster_entropy: negative count");
    total += c;
  }
  if (total == 0) throw ConfigError("cluster_entropy: all counts are zero");

  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;  // 0 ln 0 := 0
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h + 0.0;  // normalize -0.0 from the single-cluster case
}

namespace {

void finalize_entropies(std::vector<GroupEntropy>& out);

}  // namespace

std::vector<GroupEntropy> group_entropies(const Assignment& assignment,
                                          const FeatureTable& table, int k) {
  std::vector<GroupEntropy> out = group_histograms(assignment, table, k);
  finalize_entropies(out);
  return out;
}

std::vector<GroupEntropy> group_entropies(
    const std::vector<std::pair<std::string, int>>& assigned, int k) {
  std::vector<GroupEntropy> out = group_histograms(assigned, k);
  finalize_entropies(out);
  return out;
}

namespace {

void finalize_entropies(std::vector<GroupEntropy>& out) {
  for (GroupEntropy& ge : out) {
    ge.proportions.resize(ge.counts.size());
    for (std::size_t i = 0; i < ge.counts.size(); ++i) {
      ge.proportions[i] = ge.n_patches > 0
                              ? static_cast<double>(ge.counts[i]) /
                                    static_cast<double>(ge.n_patches)
                              : 0.0;
    }
    ge.entropy = cluster_entropy(ge.counts);
  }
}

}  // namespace

RankedSelection rank_groups(std::vector<GroupEntropy> entropies, std::size_t n) {
  const std::size_t m = entropies.size();
  if (n < 1) throw ConfigError("rank_groups: slice size must be >= 1");
  if (n > m) {
    throw ConfigError("rank_groups: slice size " + std::to_string(n) +
                      " exceeds group count " + std::to_string(m));
  }
  std::sort(entropies.begin(), entropies.end(),
            [](const GroupEntropy& a, const GroupEntropy& b) {
              if (a.entropy != b.entropy) return a.entropy > b.entropy;
              return a.group_id < b.group_id;
            });

  RankedSelection ranking;
  ranking.ordered = std::move(entropies);
  for (std::size_t i = 0; i < n; ++i) {
    ranking.high.push_back(ranking.ordered[i].group_id);
    ranking.low.push_back(ranking.ordered[m - n + i].group_id);
  }
  // n ranks centered on the median position; even n shifts right.
  const std::size_t center = (m - 1) / 2;
  const std::size_t start = center - (n - 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    ranking.med.push_back(ranking.ordered[start + i].group_id);
  }
  return ranking;
}

const std::string& select_wsi(const RankedSelection& ranking) {
  if (ranking.ordered.empty()) throw ConfigError("select_wsi: empty ranking");
  return ranking.ordered.front().group_id;
}

namespace {

json entropy_to_json(const GroupEntropy& ge) {
  json j;
  j["group_id"] = ge.group_id;
  j["n"] = ge.n_patches;
  j["counts"] = ge.counts;
  j["entropy"] = ge.entropy;
  return j;
}

GroupEntropy entropy_from_json(const json& j) {
  GroupEntropy ge;
  ge.group_id = j.at("group_id").get<std::string>();
  ge.n_patches = j.at("n").get<std::int64_t>();
  ge.counts = j.at("counts").get<std::vector<std::int64_t>>();
  ge.entropy = j.at("entropy").get<double>();
  ge.proportions.resize(ge.counts.size());
  for (std::size_t i = 0; i < ge.counts.size(); ++i) {
    ge.proportions[i] = ge.n_patches > 0
                            ? static_cast<double>(ge.counts[i]) /
                                  static_cast<double>(ge.n_patches)
                            : 0.0;
  }
  return ge;
}

}  // namespace

std::string entropies_to_ndjson(const std::vector<GroupEntropy>& entropies) {
  std::ostringstream out;
  for (const GroupEntropy& ge : entropies) out << entropy_to_json(ge).dump() << "\n";
  return out.str();
}

std::vector<GroupEntropy> entropies_from_ndjson(const std::string& text) {
  std::vector<GroupEntropy> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(entropy_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IngestError(std::string("invalid entropy NDJSON line: ") + e.what());
    }
  }
  return out;
}

std::string ranking_to_ndjson(const RankedSelection& ranking) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ranking.ordered.size(); ++i) {
    json j = entropy_to_json(ranking.ordered[i]);
    j["rank"] = i;
    j["slice"] = ranking.slice_of(ranking.ordered[i].group_id);
    out << j.dump() << "\n";
  }
  return out.str();
}

RankedSelection ranking_from_ndjson(const std::string& text) {
  RankedSelection ranking;
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::size_t, GroupEntropy>> rows;
  std::vector<std::pair<std::size_t, std::string>> slices;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IngestError(std::string("invalid ranking NDJSON line: ") + e.what());
    }
    const std::size_t rank = j.at("rank").get<std::size_t>();
    rows.emplace_back(rank, entropy_from_json(j));
    slices.emplace_back(rank, j.at("slice").get<std::string>());
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(slices.begin(), slices.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != i) throw IngestError("ranking NDJSON: ranks not contiguous");
    ranking.ordered.push_back(std::move(rows[i].second));
    const std::string& slice = slices[i].second;
    const std::string& gid = ranking.ordered.back().group_id;
    if (slice == "high") ranking.high.push_back(gid);
    else if (slice == "med") ranking.med.push_back(gid);
    else if (slice == "low") ranking.low.push_back(gid);
    else if (slice != "none") throw IngestError("ranking NDJSON: bad slice '" + slice + "'");
  }
  return ranking;
}

}  // namespace wsisel
