#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "support/tables.hpp"
#include "wsisel/pca.hpp"
#include "wsisel/rng.hpp"

using namespace wsisel;
using wsisel::testsupport::eigen_2x2;
using wsisel::testsupport::make_table;

namespace {

FeatureTable random_table(int n, int dim, std::uint64_t seed, double scale = 1.0) {
  Xoshiro256ss rng(seed);
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (auto& p : points) {
    for (double& x : p) x = rng.next_normal() * scale + rng.next_double();
  }
  return make_table(points);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

TEST_SUITE("pca") {

TEST_CASE("axis-aligned data: component +e1, eigenvalue 4") {
  const FeatureTable table =
      make_table({{-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {3.0, 0.0, 0.0}});
  const PcaModel model = fit_pca(table, 1);
  CHECK(model.mean[0] == doctest::Approx(1.0));
  CHECK(model.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(model.components[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(model.components[0][1]) < 1e-9);
  CHECK(std::fabs(model.components[0][2]) < 1e-9);
}

TEST_CASE("2x2 closed-form oracle: cov [[2,1],[1,2]]") {
  // These three points have sample covariance exactly [[2,1],[1,2]].
  const double r2 = std::sqrt(2.0);
  const FeatureTable table = make_table({{r2, 0.0}, {0.0, r2}, {-r2, -r2}});
  const PcaModel model = fit_pca(table, 2);

  const auto oracle = eigen_2x2(2.0, 1.0, 2.0);
  CHECK(oracle.lambda1 == doctest::Approx(3.0));
  CHECK(oracle.lambda2 == doctest::Approx(1.0));
  CHECK(model.eigenvalues[0] == doctest::Approx(oracle.lambda1).epsilon(1e-12));
  CHECK(model.eigenvalues[1] == doctest::Approx(oracle.lambda2).epsilon(1e-12));
  // first component is (1,1)/sqrt(2) under the sign convention
  CHECK(model.components[0][0] == doctest::Approx(1.0 / r2).epsilon(1e-9));
  CHECK(model.components[0][1] == doctest::Approx(1.0 / r2).epsilon(1e-9));
  CHECK(model.components[1][0] == doctest::Approx(1.0 / r2).epsilon(1e-9));
  CHECK(model.components[1][1] == doctest::Approx(-1.0 / r2).epsilon(1e-9));
}

TEST_CASE("random 2-D tables match the closed-form oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    const FeatureTable table = random_table(50, 2, seed, 3.0);
    // sample covariance by direct loops
    double mx = 0.0, my = 0.0;
    for (const auto& r : table.records()) {
      mx += r.features[0];
      my += r.features[1];
    }
    mx /= 50.0;
    my /= 50.0;
    double a = 0.0, b = 0.0, d = 0.0;
    for (const auto& r : table.records()) {
      a += (r.features[0] - mx) * (r.features[0] - mx);
      b += (r.features[0] - mx) * (r.features[1] - my);
      d += (r.features[1] - my) * (r.features[1] - my);
    }
    a /= 49.0;
    b /= 49.0;
    d /= 49.0;
    const auto oracle = eigen_2x2(a, b, d);
    const PcaModel model = fit_pca(table, 2);
    CHECK(model.eigenvalues[0] == doctest::Approx(oracle.lambda1).epsilon(1e-9));
    CHECK(model.eigenvalues[1] == doctest::Approx(oracle.lambda2).epsilon(1e-9));
    // compare up to sign
    CHECK(std::fabs(dot(model.components[0], oracle.v1)) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(dot(model.components[1], oracle.v2)) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("component rows are orthonormal") {
  const FeatureTable table = random_table(120, 8, 77);
  const PcaModel model = fit_pca(table, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      CHECK(dot(model.components[i], model.components[j]) ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvalue sum equals total variance; reconstruction error equals discarded tail") {
  const FeatureTable table = random_table(100, 6, 31, 2.0);
  const PcaModel full = fit_pca(table, 6);
  double eig_sum = 0.0;
  for (double v : full.eigenvalues) eig_sum += v;
  CHECK(eig_sum == doctest::Approx(full.total_variance).epsilon(1e-9));

  const int keep = 3;
  const PcaModel model = fit_pca(table, keep);
  double discarded = 0.0;
  for (int k = keep; k < 6; ++k) discarded += full.eigenvalues[k];

  // Mean squared reconstruction error of the fit set, computed by naive
  // projection and back-projection (scaled by N-1 to match covariance).
  const FeatureTable reduced = transform(model, table);
  double sq_err = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (int j = 0; j < 6; ++j) {
      double rebuilt = model.mean[j];
      for (int k = 0; k < keep; ++k) {
        rebuilt += reduced.record(i).features[k] * model.components[k][j];
      }
      const double diff = table.record(i).features[j] - rebuilt;
      sq_err += diff * diff;
    }
  }
  sq_err /= static_cast<double>(table.size() - 1);
  CHECK(sq_err == doctest::Approx(discarded).epsilon(1e-9));
}

TEST_CASE("transformed variances equal the eigenvalues") {
  const FeatureTable table = random_table(200, 5, 13, 4.0);
  const PcaModel model = fit_pca(table, 5);
  const FeatureTable reduced = transform(model, table);
  for (int k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (const auto& r : reduced.records()) mean += r.features[k];
    mean /= static_cast<double>(reduced.size());
    double var = 0.0;
    for (const auto& r : reduced.records()) {
      var += (r.features[k] - mean) * (r.features[k] - mean);
    }
    var /= static_cast<double>(reduced.size() - 1);
    CHECK(var == doctest::Approx(model.eigenvalues[k]).epsilon(1e-9));
  }
}

TEST_CASE("d = D projection preserves pairwise distances") {
  const FeatureTable table = random_table(40, 7, 55);
  const PcaModel model = fit_pca(table, 7);
  const FeatureTable reduced = transform(model, table);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = i + 1; j < 10; ++j) {
      double before = 0.0, after = 0.0;
      for (int k = 0; k < 7; ++k) {
        const double db = table.record(i).features[k] - table.record(j).features[k];
        const double da = reduced.record(i).features[k] - reduced.record(j).features[k];
        before += db * db;
        after += da * da;
      }
      CHECK(std::sqrt(after) == doctest::Approx(std::sqrt(before)).epsilon(1e-9));
    }
  }
}

TEST_CASE("transform matches a naive double-loop projection") {
  const FeatureTable table = random_table(50, 8, 17);
  const PcaModel model = fit_pca(table, 3);
  const FeatureTable reduced = transform(model, table);
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      double expected = 0.0;
      for (int j = 0; j < 8; ++j) {
        expected += model.components[k][j] *
                    (table.record(i).features[j] - model.mean[j]);
      }
      CHECK(reduced.record(i).features[k] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("mean maps to the zero vector") {
  const FeatureTable table = random_table(30, 4, 23);
  const PcaModel model = fit_pca(table, 4);
  FeatureTable probe = make_table({model.mean});
  const FeatureTable reduced = transform(model, probe);
  for (double v : reduced.record(0).features) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("fit is deterministic bit for bit") {
  const FeatureTable table = random_table(80, 6, 41);
  const PcaModel a = fit_pca(table, 4);
  const PcaModel b = fit_pca(table, 4);
  CHECK(to_json_string(a) == to_json_string(b));
}

TEST_CASE("transform keeps group sizes") {
  Xoshiro256ss rng(2);
  std::vector<std::vector<double>> points;
  std::vector<std::string> groups;
  for (int i = 0; i < 60; ++i) {
    points.push_back({rng.next_normal(), rng.next_normal(), rng.next_normal()});
    groups.push_back("w" + std::to_string(i % 7));
  }
  const FeatureTable table = make_table(points, groups);
  const FeatureTable reduced = transform(fit_pca(table, 2), table);
  REQUIRE(reduced.group_order() == table.group_order());
  for (const std::string& g : table.group_order()) {
    CHECK(reduced.group_rows(g).size() == table.group_rows(g).size());
  }
}

TEST_CASE("errors: d > D and too few records") {
  const FeatureTable table = make_table({{1.0, 2.0}, {3.0, 4.0}});
  CHECK_THROWS_AS(fit_pca(table, 3), DimensionError);
  const FeatureTable one = make_table({{1.0, 2.0}});
  CHECK_THROWS_AS(fit_pca(one, 1), ConfigError);

  const PcaModel model = fit_pca(table, 2);
  const FeatureTable wrong_dim = make_table({{1.0, 2.0, 3.0}});
  CHECK_THROWS_AS(transform(model, wrong_dim), DimensionError);
}

TEST_CASE("model JSON survives a round trip") {
  const FeatureTable table = random_table(25, 3, 9);
  const PcaModel model = fit_pca(table, 2);
  const PcaModel back = pca_model_from_json(to_json_string(model));
  CHECK(back.mean == model.mean);
  CHECK(back.components == model.components);
  CHECK(back.eigenvalues == model.eigenvalues);
  CHECK(back.total_variance == model.total_variance);
}

}  // TEST_SUITE
