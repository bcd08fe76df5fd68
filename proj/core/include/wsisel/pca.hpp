#pragma once

#include <string>
#include <vector>

#include "wsisel/dataset.hpp"

namespace wsisel {

/// Principal-component projection fitted on a feature table.
/// Component rows are orthonormal; eigenvalues are sorted non-increasing
/// and clamped at zero.
struct PcaModel {
  std::vector<double> mean;                      // length input_dim
  std::vector<std::vector<double>> components;   // out_dim rows of input_dim
  std::vector<double> eigenvalues;               // length out_dim
  double total_variance = 0.0;                   // trace of the covariance
  int input_dim = 0;
  int out_dim = 0;
};

/// Fit mean + top-d eigenvectors of the sample covariance (divisor N-1).
/// Eigendecomposition is done with cyclic Jacobi rotations; each component
/// row is sign-fixed so its largest-magnitude entry is positive (ties
/// resolved at the lowest index). Deterministic: same input, same bits.
PcaModel fit_pca(const FeatureTable& table, int out_dim);

/// Project every record: y = components * (x - mean). Ids, groups, labels
/// and the domain tag carry over unchanged.
FeatureTable transform(const PcaModel& model, const FeatureTable& table);

std::string to_json_string(const PcaModel& model);
PcaModel pca_model_from_json(const std::string& text);

void save_pca_model(const PcaModel& model, const std::string& path);
PcaModel load_pca_model(const std::string& path);

}  // namespace wsisel
