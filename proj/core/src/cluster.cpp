#include "wsisel/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <set>

#include <json.hpp>

#include "wsisel/rng.hpp"

namespace wsisel {

using json = nlohmann::json;

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

int nearest_centroid(const std::vector<double>& point,
                     const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_dist = squared_distance(point, centroids[0]);
  for (std::size_t k = 1; k < centroids.size(); ++k) {
    const double dist = squared_distance(point, centroids[k]);
    if (dist < best_dist) {  // strict: ties keep the lowest index
      best_dist = dist;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::size_t count_distinct(const FeatureTable& table) {
  std::set<std::vector<double>> distinct;
  for (const PatchRecord& r : table.records()) distinct.insert(r.features);
  return distinct.size();
}

void check_finite(const std::vector<std::vector<double>>& rows, const char* what) {
  for (const auto& row : rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
    }
  }
}

}  // namespace

std::vector<std::vector<double>> seed_plus_plus(const FeatureTable& table,
                                                int k, std::uint64_t seed) {
  if (table.size() == 0) throw ConfigError("seed_plus_plus: empty table");
  if (k <= 0) throw ConfigError("seed_plus_plus: K must be positive");
  if (static_cast<std::size_t>(k) > count_distinct(table)) {
    throw ConfigError("seed_plus_plus: K=" + std::to_string(k) +
                      " exceeds the number of distinct points");
  }

  Xoshiro256ss rng(seed);
  const std::size_t n = table.size();
  std::vector<std::vector<double>> centers;
  centers.reserve(k);

  centers.push_back(table.record(rng.next_below(n)).features);

  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_dist[i] = squared_distance(table.record(i).features, centers[0]);
  }

  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : min_dist) total += d;
    // K <= distinct points guarantees some positive weight remains.
    const double r = rng.next_double() * total;
    double acc = 0.0;
    std::size_t chosen = 0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      acc += min_dist[i];
      if (r < acc) {
        chosen = i;
        found = true;
        break;
      }
    }
    if (!found) {
      // r landed on the top edge of the cumulative sum; take the last
      // point with positive weight.
      for (std::size_t i = n; i-- > 0;) {
        if (min_dist[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(table.record(chosen).features);
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i],
                             squared_distance(table.record(i).features, centers.back()));
    }
  }
  return centers;
}

LloydResult lloyd(const FeatureTable& table,
                  const std::vector<std::vector<double>>& init, double tol,
                  int max_iter) {
  if (init.empty()) throw ConfigError("lloyd: empty init");
  if (!(tol > 0.0)) throw ConfigError("lloyd: tol must be positive");
  if (max_iter < 1) throw ConfigError("lloyd: max_iter must be >= 1");
  check_finite(init, "lloyd init");

  const int k = static_cast<int>(init.size());
  const int dim = table.dim();
  const std::size_t n = table.size();
  if (init[0].size() != static_cast<std::size_t>(dim)) {
    throw DimensionError("lloyd: init dim does not match table dim");
  }

  LloydResult result;
  result.model.centroids = init;
  result.model.k = k;
  result.assignment.labels.assign(n, 0);

  double prev_inertia = std::numeric_limits<double>::infinity();
  int iterations = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    ++iterations;

    // Assignment step.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = nearest_centroid(table.record(i).features,
                                         result.model.centroids);
      result.assignment.labels[i] = label;
      inertia += squared_distance(table.record(i).features,
                                  result.model.centroids[label]);
    }
    result.inertia_history.push_back(inertia);
    result.model.inertia = inertia;

    const bool converged =
        prev_inertia != std::numeric_limits<double>::infinity() &&
        (prev_inertia == 0.0 ||
         (prev_inertia - inertia) / prev_inertia < tol);
    prev_inertia = inertia;
    if (converged) break;

    // Update step: per-cluster means, summed in table order.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::int64_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int label = result.assignment.labels[i];
      const std::vector<double>& x = table.record(i).features;
      for (int j = 0; j < dim; ++j) sums[label][j] += x[j];
      ++counts[label];
    }
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (int j = 0; j < dim; ++j) {
          result.model.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
      } else {
        // Re-seed the empty cluster on the point farthest from its own
        // centroid (ties: lowest record index), each point used once.
        std::size_t far_idx = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (taken[i]) continue;
          const double dist = squared_distance(
              table.record(i).features,
              result.model.centroids[result.assignment.labels[i]]);
          if (dist > far_dist) {
            far_dist = dist;
            far_idx = i;
          }
        }
        taken[far_idx] = true;
        result.model.centroids[c] = table.record(far_idx).features;
      }
    }
  }

  result.model.iterations_run = iterations;
  return result;
}

LloydResult fit_kmeans(const FeatureTable& table, int k, std::uint64_t seed,
                       const KMeansOptions& options) {
  if (options.restarts < 1) throw ConfigError("fit_kmeans: restarts must be >= 1");

  auto run_one = [&](int r) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
    LloydResult result = lloyd(table, seed_plus_plus(table, k, run_seed),
                               options.tol, options.max_iter);
    result.model.seed = run_seed;
    return result;
  };

  std::vector<LloydResult> runs(options.restarts);
  if (options.jobs > 1 && options.restarts > 1) {
    std::vector<std::future<LloydResult>> futures;
    futures.reserve(options.restarts);
    for (int r = 0; r < options.restarts; ++r) {
      futures.push_back(std::async(std::launch::async, run_one, r));
    }
    for (int r = 0; r < options.restarts; ++r) runs[r] = futures[r].get();
  } else {
    for (int r = 0; r < options.restarts; ++r) runs[r] = run_one(r);
  }

  // Lowest inertia wins; ties go to the lowest seed (= lowest index).
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].model.inertia < runs[best].model.inertia) best = r;
  }
  return std::move(runs[best]);
}

Assignment assign(const KMeansModel& model, const FeatureTable& table) {
  if (model.centroids.empty() ||
      model.centroids[0].size() != static_cast<std::size_t>(table.dim())) {
    throw DimensionError("assign: centroid dim does not match table dim");
  }
  Assignment assignment;
  assignment.labels.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    assignment.labels[i] = nearest_centroid(table.record(i).features, model.centroids);
  }
  return assignment;
}

std::string to_json_string(const KMeansModel& model) {
  json j;
  j["centroids"] = model.centroids;
  j["k"] = model.k;
  j["inertia"] = model.inertia;
  j["iterations_run"] = model.iterations_run;
  j["seed"] = model.seed;
  return j.dump(2) + "\n";
}

KMeansModel kmeans_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid k-means model JSON: ") + e.what());
  }
  KMeansModel model;
  model.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
  model.k = j.at("k").get<int>();
  model.inertia = j.at("inertia").get<double>();
  model.iterations_run = j.at("iterations_run").get<int>();
  model.seed = j.at("seed").get<std::uint64_t>();
  return model;
}

void save_kmeans_model(const KMeansModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << to_json_string(model);
}

KMeansModel load_kmeans_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return kmeans_model_from_json(text);
}

}  // namespace wsisel
