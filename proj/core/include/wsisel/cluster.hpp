#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsisel/dataset.hpp"

namespace wsisel {

struct KMeansModel {
  std::vector<std::vector<double>> centroids;  // K rows of dim
  int k = 0;
  double inertia = 0.0;       // sum of squared distances to nearest centroid
  int iterations_run = 0;
  std::uint64_t seed = 0;
};

/// Cluster index per record, in table order.
struct Assignment {
  std::vector<int> labels;
};

struct LloydResult {
  KMeansModel model;
  Assignment assignment;
  std::vector<double> inertia_history;  // inertia after each iteration
};

struct KMeansOptions {
  double tol = 1e-6;   // relative inertia improvement stopping threshold
  int max_iter = 300;
  int restarts = 10;
  int jobs = 1;        // restarts may run in parallel; result is seed-stable
};

/// k-means++ initialization: first center uniform over records, each
/// following center sampled with probability proportional to the squared
/// distance to the nearest chosen center. Deterministic given the seed.
std::vector<std::vector<double>> seed_plus_plus(const FeatureTable& table,
                                                int k, std::uint64_t seed);

/// Lloyd refinement from a fixed init. Ties in the assignment step go to
/// the lowest cluster index; a cluster that empties is re-seeded on the
/// point farthest from its current centroid. Stops when the relative
/// inertia improvement falls below tol or after max_iter iterations.
LloydResult lloyd(const FeatureTable& table,
                  const std::vector<std::vector<double>>& init, double tol,
                  int max_iter);

/// seed_plus_plus + lloyd over seeds seed, seed+1, ..., seed+restarts-1;
/// keeps the run with the lowest inertia (ties: lowest seed).
LloydResult fit_kmeans(const FeatureTable& table, int k, std::uint64_t seed,
                       const KMeansOptions& options = {});

/// Nearest-centroid labels for a table (ties: lowest cluster index).
Assignment assign(const KMeansModel& model, const FeatureTable& table);

std::string to_json_string(const KMeansModel& model);
KMeansModel kmeans_model_from_json(const std::string& text);
void save_kmeans_model(const KMeansModel& model, const std::string& path);
KMeansModel load_kmeans_model(const std::string& path);

}  // namespace wsisel
