#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/tables.hpp"
#include "wsisel/entropy.hpp"
#include "wsisel/rng.hpp"

using namespace wsisel;
using wsisel::testsupport::make_table;

namespace {

constexpr double kLn10 = 2.302585092994046;
// -(0.75 ln 0.75 + 0.25 ln 0.25), frozen from an independent
// high-precision evaluation
constexpr double kEntropy31 = 0.5623351446188083;

std::vector<std::int64_t> random_counts(Xoshiro256ss& rng, int k) {
  std::vector<std::int64_t> counts(k, 0);
  bool any = false;
  for (auto& c : counts) {
    c = static_cast<std::int64_t>(rng.next_below(20));
    any = any || c > 0;
  }
  if (!any) counts[rng.next_below(k)] = 1;
  return counts;
}

std::vector<GroupEntropy> entropies_of(const std::vector<std::string>& ids,
                                       const std::vector<double>& values) {
  std::vector<GroupEntropy> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    GroupEntropy ge;
    ge.group_id = ids[i];
    ge.entropy = values[i];
    ge.n_patches = 1;
    ge.counts = {1};
    out.push_back(ge);
  }
  return out;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("single-cluster group has zero entropy") {
  CHECK(cluster_entropy({7, 0, 0, 0}) == 0.0);
  CHECK(!std::signbit(cluster_entropy({7, 0, 0, 0})));
}

TEST_CASE("uniform counts reach ln K") {
  const std::vector<std::int64_t> uniform(10, 42);
  CHECK(cluster_entropy(uniform) == doctest::Approx(kLn10).epsilon(1e-15));
  CHECK(std::fabs(cluster_entropy(uniform) - kLn10) < 1e-12);
}

TEST_CASE("counts [3,1,0,0] match the frozen oracle value") {
  CHECK(std::fabs(cluster_entropy({3, 1, 0, 0}) - kEntropy31) < 1e-12);
}

TEST_CASE("empty histogram is rejected") {
  CHECK_THROWS_AS(cluster_entropy({0, 0, 0}), ConfigError);
}

TEST_CASE("property: bounds, permutation and scale invariance, merging") {
  Xoshiro256ss rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_below(31));  // K <= 32
    std::vector<std::int64_t> counts = random_counts(rng, k);
    const double h = cluster_entropy(counts);

    // bounds
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(k)) + 1e-12);

    // equality conditions
    std::int64_t nonzero = 0;
    for (auto c : counts) nonzero += c > 0 ? 1 : 0;
    if (nonzero == 1) CHECK(h == 0.0);
    if (h == 0.0) CHECK(nonzero == 1);

    // permutation invariance
    std::vector<std::int64_t> shuffled = counts;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    }
    CHECK(cluster_entropy(shuffled) == doctest::Approx(h).epsilon(1e-12));

    // positive integer scale invariance
    const std::int64_t factor = 1 + static_cast<std::int64_t>(rng.next_below(9));
    std::vector<std::int64_t> scaled = counts;
    for (auto& c : scaled) c *= factor;
    CHECK(cluster_entropy(scaled) == doctest::Approx(h).epsilon(1e-12));

    // merging two clusters never increases entropy
    if (k >= 2) {
      const std::size_t a = rng.next_below(k);
      std::size_t b = rng.next_below(k);
      if (b == a) b = (b + 1) % k;
      std::vector<std::int64_t> merged;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i == b) continue;
        merged.push_back(i == a ? counts[a] + counts[b] : counts[i]);
      }
      CHECK(cluster_entropy(merged) <= h + 1e-12);
    }
  }
}

TEST_CASE("group_histograms tallies per group") {
  const FeatureTable table = make_table(
      {{0.0}, {1.0}, {2.0}}, {"w1", "w1", "w1"});
  Assignment assignment;
  assignment.labels = {0, 0, 1};
  const auto histograms = group_histograms(assignment, table, 2);
  REQUIRE(histograms.size() == 1);
  CHECK(histograms[0].counts == std::vector<std::int64_t>{2, 1});
  CHECK(histograms[0].n_patches == 3);
}

TEST_CASE("group_histograms matches a filter-then-count oracle on interleaved groups") {
  Xoshiro256ss rng(7);
  const int k = 5;
  std::vector<std::vector<double>> points;
  std::vector<std::string> groups;
  Assignment assignment;
  for (int i = 0; i < 300; ++i) {
    points.push_back({rng.next_double()});
    groups.push_back("w" + std::to_string(rng.next_below(4)));
    assignment.labels.push_back(static_cast<int>(rng.next_below(k)));
  }
  const FeatureTable table = make_table(points, groups);
  const auto histograms = group_histograms(assignment, table, k);

  REQUIRE(histograms.size() == table.group_count());
  for (std::size_t g = 0; g < histograms.size(); ++g) {
    CHECK(histograms[g].group_id == table.group_order()[g]);
    std::vector<std::int64_t> expected(k, 0);
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.record(i).group_id == histograms[g].group_id) {
        ++expected[assignment.labels[i]];
      }
    }
    CHECK(histograms[g].counts == expected);
  }
}

TEST_CASE("cluster absent from a group contributes nothing") {
  const FeatureTable table = make_table({{0.0}, {1.0}}, {"w1", "w1"});
  Assignment assignment;
  assignment.labels = {2, 2};
  const auto entropies = group_entropies(assignment, table, 4);
  CHECK(entropies[0].counts == std::vector<std::int64_t>{0, 0, 2, 0});
  CHECK(entropies[0].entropy == 0.0);
}

TEST_CASE("group_histograms rejects a mismatched assignment") {
  const FeatureTable table = make_table({{0.0}, {1.0}});
  Assignment assignment;
  assignment.labels = {0};
  CHECK_THROWS_AS(group_histograms(assignment, table, 2), ConfigError);
}

TEST_CASE("rank_groups: explicit three-group example") {
  const auto ranking =
      rank_groups(entropies_of({"a", "b", "c"}, {0.1, 0.9, 0.5}), 1);
  CHECK(ranking.high == std::vector<std::string>{"b"});
  CHECK(ranking.med == std::vector<std::string>{"c"});
  CHECK(ranking.low == std::vector<std::string>{"a"});
  CHECK(select_wsi(ranking) == "b");
}

TEST_CASE("rank_groups: 108 groups, n=5, disjoint slices") {
  Xoshiro256ss rng(11);
  std::vector<std::string> ids;
  std::vector<double> values;
  for (int i = 0; i < 108; ++i) {
    ids.push_back("w" + std::to_string(i));
    values.push_back(rng.next_double());
  }
  const auto ranking = rank_groups(entropies_of(ids, values), 5);
  CHECK(ranking.high.size() == 5);
  CHECK(ranking.med.size() == 5);
  CHECK(ranking.low.size() == 5);
  for (const std::string& id : ranking.high) {
    CHECK(ranking.slice_of(id) == "high");
    CHECK(std::find(ranking.med.begin(), ranking.med.end(), id) == ranking.med.end());
    CHECK(std::find(ranking.low.begin(), ranking.low.end(), id) == ranking.low.end());
  }
  for (const std::string& id : ranking.med) {
    CHECK(std::find(ranking.low.begin(), ranking.low.end(), id) == ranking.low.end());
  }
  // ordered is a permutation of the inputs, entropy descending
  CHECK(ranking.ordered.size() == 108);
  for (std::size_t i = 1; i < ranking.ordered.size(); ++i) {
    CHECK(ranking.ordered[i - 1].entropy >= ranking.ordered[i].entropy);
  }
}

TEST_CASE("rank_groups: ties sort by ascending group id") {
  const auto ranking =
      rank_groups(entropies_of({"z", "m", "a", "q"}, {0.5, 0.5, 0.5, 0.5}), 2);
  CHECK(ranking.high == std::vector<std::string>{"a", "m"});
  CHECK(ranking.low == std::vector<std::string>{"q", "z"});
}

TEST_CASE("rank_groups: med slice centering") {
  // 9 groups with entropies 9..1 (ids in rank order g0..g8):
  // high = first 3, med = centered on rank 4, low = last 3
  std::vector<std::string> ids;
  std::vector<double> values;
  for (int i = 0; i < 9; ++i) {
    ids.push_back("g" + std::to_string(i));
    values.push_back(9.0 - i);
  }
  const auto ranking = rank_groups(entropies_of(ids, values), 3);
  CHECK(ranking.high == std::vector<std::string>{"g0", "g1", "g2"});
  CHECK(ranking.med == std::vector<std::string>{"g3", "g4", "g5"});
  CHECK(ranking.low == std::vector<std::string>{"g6", "g7", "g8"});

  // even slice on an even count shifts right of the median position
  std::vector<std::string> ids6;
  std::vector<double> values6;
  for (int i = 0; i < 6; ++i) {
    ids6.push_back("g" + std::to_string(i));
    values6.push_back(6.0 - i);
  }
  const auto even = rank_groups(entropies_of(ids6, values6), 2);
  CHECK(even.high == std::vector<std::string>{"g0", "g1"});
  CHECK(even.med == std::vector<std::string>{"g2", "g3"});
  CHECK(even.low == std::vector<std::string>{"g4", "g5"});
}

TEST_CASE("rank_groups rejects an oversized slice") {
  CHECK_THROWS_AS(rank_groups(entropies_of({"a"}, {0.5}), 2), ConfigError);
}

TEST_CASE("select_wsi equals an argmax oracle on a synthetic run") {
  Xoshiro256ss rng(23);
  std::vector<GroupEntropy> entropies;
  for (int g = 0; g < 40; ++g) {
    GroupEntropy ge;
    ge.group_id = "w" + std::to_string(g);
    ge.counts = random_counts(rng, 8);
    ge.n_patches = 0;
    for (auto c : ge.counts) ge.n_patches += c;
    ge.entropy = cluster_entropy(ge.counts);
    entropies.push_back(ge);
  }
  const auto ranking = rank_groups(entropies, 5);

  // independent argmax with the same tie rule
  std::string best_id;
  double best_h = -1.0;
  for (const auto& ge : entropies) {
    const double h = cluster_entropy(ge.counts);
    if (h > best_h || (h == best_h && ge.group_id < best_id)) {
      best_h = h;
      best_id = ge.group_id;
    }
  }
  CHECK(select_wsi(ranking) == best_id);
}

TEST_CASE("entropy ordering is invariant to the log base") {
  // Rescaling every entropy by a constant (base change) keeps the order.
  Xoshiro256ss rng(5);
  std::vector<GroupEntropy> nats;
  for (int g = 0; g < 25; ++g) {
    GroupEntropy ge;
    ge.group_id = "w" + std::to_string(g);
    ge.counts = random_counts(rng, 6);
    ge.n_patches = 1;
    ge.entropy = cluster_entropy(ge.counts);
    nats.push_back(ge);
  }
  std::vector<GroupEntropy> bits = nats;
  for (auto& ge : bits) ge.entropy /= std::log(2.0);  // nats -> bits
  const auto rank_nats = rank_groups(nats, 5);
  const auto rank_bits = rank_groups(bits, 5);
  for (std::size_t i = 0; i < rank_nats.ordered.size(); ++i) {
    CHECK(rank_nats.ordered[i].group_id == rank_bits.ordered[i].group_id);
  }
  CHECK(select_wsi(rank_nats) == select_wsi(rank_bits));
}

TEST_CASE("NDJSON round trip for entropies and rankings") {
  Xoshiro256ss rng(13);
  std::vector<GroupEntropy> entropies;
  for (int g = 0; g < 12; ++g) {
    GroupEntropy ge;
    ge.group_id = "w" + std::to_string(g);
    ge.counts = random_counts(rng, 4);
    ge.n_patches = 0;
    for (auto c : ge.counts) ge.n_patches += c;
    ge.entropy = cluster_entropy(ge.counts);
    entropies.push_back(ge);
  }
  const auto back = entropies_from_ndjson(entropies_to_ndjson(entropies));
  REQUIRE(back.size() == entropies.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].group_id == entropies[i].group_id);
    CHECK(back[i].counts == entropies[i].counts);
    CHECK(back[i].entropy == entropies[i].entropy);
  }

  const auto ranking = rank_groups(entropies, 3);
  const auto ranking_back = ranking_from_ndjson(ranking_to_ndjson(ranking));
  CHECK(ranking_back.high == ranking.high);
  CHECK(ranking_back.med == ranking.med);
  CHECK(ranking_back.low == ranking.low);
  REQUIRE(ranking_back.ordered.size() == ranking.ordered.size());
  for (std::size_t i = 0; i < ranking.ordered.size(); ++i) {
    CHECK(ranking_back.ordered[i].group_id == ranking.ordered[i].group_id);
    CHECK(ranking_back.ordered[i].entropy == ranking.ordered[i].entropy);
  }
}

}  // TEST_SUITE
