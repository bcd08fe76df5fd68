#include "wsisel/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace wsisel {

using json = nlohmann::json;

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Rotations sweep
// the upper triangle until every off-diagonal magnitude drops below
// 1e-12 * trace. Returns eigenvalues on the diagonal of `a` and
// eigenvectors as columns of `v`.
void jacobi_eigen(std::vector<std::vector<double>>& a,
                  std::vector<std::vector<double>>& v) {
  const std::size_t n = a.size();
  v.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a[i][i];
  const double threshold = 1e-12 * trace;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a[p][q]));
    if (off <= threshold) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (std::fabs(apq) <= threshold) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p];
          const double aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i];
          const double aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v[i][p];
          const double viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }
}

void fix_sign(std::vector<double>& row) {
  std::size_t arg = 0;
  double best = std::fabs(row[0]);
  for (std::size_t j = 1; j < row.size(); ++j) {
    const double mag = std::fabs(row[j]);
    if (mag > best) {  // strict: ties keep the lowest index
      best = mag;
      arg = j;
    }
  }
  if (row[arg] < 0.0) {
    for (double& x : row) x = -x;
  }
}

}  // namespace

PcaModel fit_pca(const FeatureTable& table, int out_dim) {
  const int d = table.dim();
  if (out_dim <= 0 || out_dim > d) {
    throw DimensionError("fit_pca: target dimension " + std::to_string(out_dim) +
                         " not in [1, " + std::to_string(d) + "]");
  }
  const std::size_t n = table.size();
  if (n < 2) throw ConfigError("fit_pca: need at least 2 records");

  PcaModel model;
  model.input_dim = d;
  model.out_dim = out_dim;
  model.mean.assign(d, 0.0);
  for (const PatchRecord& r : table.records()) {
    for (int j = 0; j < d; ++j) model.mean[j] += r.features[j];
  }
  for (int j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

  // Sample covariance, divisor N-1, accumulated in table order.
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  std::vector<double> centered(d);
  for (const PatchRecord& r : table.records()) {
    for (int j = 0; j < d; ++j) centered[j] = r.features[j] - model.mean[j];
    for (int i = 0; i < d; ++i) {
      const double ci = centered[i];
      for (int j = i; j < d; ++j) cov[i][j] += ci * centered[j];
    }
  }
  const double divisor = static_cast<double>(n - 1);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      cov[i][j] /= divisor;
      cov[j][i] = cov[i][j];
    }
  }
  model.total_variance = 0.0;
  for (int i = 0; i < d; ++i) model.total_variance += cov[i][i];

  std::vector<std::vector<double>> vectors;
  jacobi_eigen(cov, vectors);

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return cov[a][a] > cov[b][b]; });

  model.eigenvalues.resize(out_dim);
  model.components.assign(out_dim, std::vector<double>(d));
  for (int k = 0; k < out_dim; ++k) {
    const int col = order[k];
    model.eigenvalues[k] = std::max(cov[col][col], 0.0);
    for (int j = 0; j < d; ++j) model.components[k][j] = vectors[j][col];
    fix_sign(model.components[k]);
  }
  return model;
}

FeatureTable transform(const PcaModel& model, const FeatureTable& table) {
  if (table.dim() != model.input_dim) {
    throw DimensionError("transform: table dim " + std::to_string(table.dim()) +
                         " does not match model dim " +
                         std::to_string(model.input_dim));
  }
  std::vector<PatchRecord> out;
  out.reserve(table.size());
  std::vector<double> centered(model.input_dim);
  for (const PatchRecord& r : table.records()) {
    for (int j = 0; j < model.input_dim; ++j) centered[j] = r.features[j] - model.mean[j];
    PatchRecord projected;
    projected.patch_id = r.patch_id;
    projected.group_id = r.group_id;
    projected.label = r.label;
    projected.features.resize(model.out_dim);
    for (int k = 0; k < model.out_dim; ++k) {
      double acc = 0.0;
      const std::vector<double>& row = model.components[k];
      for (int j = 0; j < model.input_dim; ++j) acc += row[j] * centered[j];
      projected.features[k] = acc;
    }
    out.push_back(std::move(projected));
  }
  return FeatureTable(std::move(out), model.out_dim, table.num_classes(),
                      table.domain());
}

std::string to_json_string(const PcaModel& model) {
  json j;
  j["mean"] = model.mean;
  j["components"] = model.components;
  j["eigenvalues"] = model.eigenvalues;
  j["total_variance"] = model.total_variance;
  j["input_dim"] = model.input_dim;
  j["out_dim"] = model.out_dim;
  return j.dump(2) + "\n";
}

PcaModel pca_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid PCA model JSON: ") + e.what());
  }
  PcaModel model;
  model.mean = j.at("mean").get<std::vector<double>>();
  model.components = j.at("components").get<std::vector<std::vector<double>>>();
  model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  model.total_variance = j.at("total_variance").get<double>();
  model.input_dim = j.at("input_dim").get<int>();
  model.out_dim = j.at("out_dim").get<int>();
  return model;
}

void save_pca_model(const PcaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << to_json_string(model);
}

PcaModel load_pca_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return pca_model_from_json(text);
}

}  // namespace wsisel
