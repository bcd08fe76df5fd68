#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsisel/dataset.hpp"

namespace wsisel {

/// Synthetic benchmark: every class is a mixture of isotropic Gaussian
/// components; the target domain sees the same components translated and
/// scaled (domain shift), and each target WSI draws its own mixture weights
/// from a Dirichlet, so per-WSI diversity is a continuous, ground-truthed
/// knob from heavily biased to covering the whole distribution.
struct SimConfig {
  int num_classes = 3;
  int components_per_class = 2;
  int dim = 16;
  std::vector<double> source_priors{0.85, 0.10, 0.05};
  std::vector<double> target_priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double shift_translation = 2.5;   // added to every dimension of target means
  double shift_cov_scale = 2.0;     // multiplies the target stddev
  int source_wsis = 40;
  int target_wsis = 60;
  int min_patches_per_wsi = 100;
  int max_patches_per_wsi = 300;
  double alpha = 0.3;               // Dirichlet concentration (diversity knob)
  double component_spread = 4.0;    // component means drawn in [-spread, spread]^dim
  double component_stddev = 1.0;    // isotropic within-component stddev
  // Minimum pairwise distance between component means, in units of the
  // widest within-component stddev across the two domains. The mean set
  // is redrawn until it satisfies this floor.
  double min_component_separation = 6.0;
  std::uint64_t seed = 5;
};

struct SimWsiTruth {
  std::vector<double> weights;  // true mixture weights over all components
  double diversity = 0.0;       // entropy of the weights, nats
};

struct SimTruth {
  // group_id -> truth, insertion order = generation order.
  std::map<std::string, SimWsiTruth> wsis;
  std::vector<std::vector<double>> component_means;  // per component (source space)
  std::vector<int> component_class;                  // class of each component
};

struct SimResult {
  FeatureTable source;
  FeatureTable target;
  SimTruth truth;
};

SimConfig sim_config_from_json(const std::string& text);
std::string to_json_string(const SimConfig& config);

/// Deterministic given config.seed: same config, byte-identical tables.
SimResult generate(const SimConfig& config);

/// Entropy (nats) of every WSI's true mixture weights.
std::map<std::string, double> truth_diversity(const SimTruth& truth);

std::string to_json_string(const SimTruth& truth);
SimTruth sim_truth_from_json(const std::string& text);
void save_sim_truth(const SimTruth& truth, const std::string& path);
SimTruth load_sim_truth(const std::string& path);

}  // namespace wsisel
