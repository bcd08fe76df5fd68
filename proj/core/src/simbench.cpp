#include "wsisel/simbench.hpp"

#include <cmath>
#include <limits>
#include <fstream>

#include <json.hpp>

#include "wsisel/rng.hpp"

namespace wsisel {

using json = nlohmann::json;

namespace {

void check_priors(const std::vector<double>& priors, int num_classes,
                  const char* name) {
  if (priors.size() != static_cast<std::size_t>(num_classes)) {
    throw ConfigError(std::string(name) + ": expected " +
                      std::to_string(num_classes) + " entries");
  }
  double total = 0.0;
  for (double p : priors) {
    if (p < 0.0) throw ConfigError(std::string(name) + ": negative prior");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ConfigError(std::string(name) + ": priors must sum to 1");
  }
}

void validate(const SimConfig& c) {
  if (c.num_classes <= 0) throw ConfigError("sim config: num_classes must be positive");
  if (c.components_per_class <= 0) {
    throw ConfigError("sim config: components_per_class must be positive");
  }
  if (c.dim <= 0) throw ConfigError("sim config: dim must be positive");
  check_priors(c.source_priors, c.num_classes, "source_priors");
  check_priors(c.target_priors, c.num_classes, "target_priors");
  if (!(c.shift_cov_scale > 0.0)) {
    throw ConfigError("sim config: shift_cov_scale must be > 0");
  }
  if (!(c.component_stddev > 0.0)) {
    throw ConfigError("sim config: component_stddev must be > 0");
  }
  if (c.source_wsis <= 0 || c.target_wsis <= 0) {
    throw ConfigError("sim config: WSI counts must be positive");
  }
  if (c.min_patches_per_wsi <= 0 || c.max_patches_per_wsi < c.min_patches_per_wsi) {
    throw ConfigError("sim config: invalid patches_per_wsi range");
  }
  if (!(c.alpha > 0.0)) throw ConfigError("sim config: alpha must be > 0");
}

std::string padded(const char* prefix, int index, int count) {
  int digits = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++digits;
  std::string number = std::to_string(index);
  std::string pad;
  if (static_cast<int>(number.size()) < digits) {
    pad.assign(static_cast<std::size_t>(digits - static_cast<int>(number.size())), '0');
  }
  return prefix + pad + number;
}

std::size_t sample_categorical(Xoshiro256ss& rng, const std::vector<double>& weights) {
  const double r = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  throw NumericError("sample_categorical: all weights zero");
}

double weight_entropy(const std::vector<double>& weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h + 0.0;
}

}  // namespace

SimResult generate(const SimConfig& config) {
  validate(config);
  Xoshiro256ss rng(config.seed);

  const int num_components = config.num_classes * config.components_per_class;
  SimTruth truth;
  truth.component_class.resize(num_components);
  for (int m = 0; m < num_components; ++m) {
    truth.component_class[m] = m / config.components_per_class;
  }

  // Draw component means until every pair clears the separation floor
  // (measured against the blurrier of the two domains).
  const double separation_floor = config.min_component_separation *
                                  config.component_stddev *
                                  std::max(1.0, config.shift_cov_scale);
  const int max_attempts = 1000;
  for (int attempt = 0;; ++attempt) {
    if (attempt == max_attempts) {
      throw ConfigError(
          "sim config: cannot place components with the requested separation; "
          "raise component_spread or lower min_component_separation");
    }
    truth.component_means.assign(num_components, std::vector<double>(config.dim));
    for (int m = 0; m < num_components; ++m) {
      for (int j = 0; j < config.dim; ++j) {
        truth.component_means[m][j] =
            (2.0 * rng.next_double() - 1.0) * config.component_spread;
      }
    }
    double min_distance = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_components; ++a) {
      for (int b = a + 1; b < num_components; ++b) {
        double dist = 0.0;
        for (int j = 0; j < config.dim; ++j) {
          const double diff = truth.component_means[a][j] - truth.component_means[b][j];
          dist += diff * diff;
        }
        min_distance = std::min(min_distance, std::sqrt(dist));
      }
    }
    if (min_distance >= separation_floor) break;
  }

  const auto patches_in_wsi = [&](Xoshiro256ss& r) {
    const std::uint64_t span = static_cast<std::uint64_t>(
        config.max_patches_per_wsi - config.min_patches_per_wsi + 1);
    return config.min_patches_per_wsi + static_cast<int>(r.next_below(span));
  };

  // Source: patches i.i.d. from the source class priors, components
  // uniform within the class.
  std::vector<PatchRecord> source_records;
  for (int w = 0; w < config.source_wsis; ++w) {
    const std::string group = padded("s", w, config.source_wsis);
    const int n = patches_in_wsi(rng);
    for (int p = 0; p < n; ++p) {
      const int cls = static_cast<int>(sample_categorical(rng, config.source_priors));
      const int comp = cls * config.components_per_class +
                       static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(config.components_per_class)));
      PatchRecord rec;
      rec.patch_id = group + "_p" + std::to_string(p);
      rec.group_id = group;
      rec.label = cls;
      rec.features.resize(config.dim);
      for (int j = 0; j < config.dim; ++j) {
        rec.features[j] = truth.component_means[comp][j] +
                          config.component_stddev * rng.next_normal();
      }
      source_records.push_back(std::move(rec));
    }
  }

  // Target: shifted components; each WSI draws its own mixture weights
  // from a Dirichlet whose base weights follow the target class priors,
  // so alpha alone moves WSIs between biased and diverse.
  std::vector<double> dirichlet_alphas(num_components);
  for (int m = 0; m < num_components; ++m) {
    const double base = config.target_priors[truth.component_class[m]] /
                        static_cast<double>(config.components_per_class);
    dirichlet_alphas[m] = config.alpha * num_components * base;
    if (!(dirichlet_alphas[m] > 0.0)) {
      // A zero-prior class still needs a valid Dirichlet parameter; its
      // weight is forced to zero after the draw.
      dirichlet_alphas[m] = 1e-12;
    }
  }

  const double target_stddev = config.component_stddev * config.shift_cov_scale;
  std::vector<PatchRecord> target_records;
  for (int w = 0; w < config.target_wsis; ++w) {
    const std::string group = padded("t", w, config.target_wsis);
    SimWsiTruth wsi_truth;
    wsi_truth.weights = sample_dirichlet(rng, dirichlet_alphas);
    for (int m = 0; m < num_components; ++m) {
      if (config.target_priors[truth.component_class[m]] == 0.0) {
        wsi_truth.weights[m] = 0.0;
      }
    }
    wsi_truth.diversity = weight_entropy(wsi_truth.weights);

    const int n = patches_in_wsi(rng);
    for (int p = 0; p < n; ++p) {
      const int comp = static_cast<int>(sample_categorical(rng, wsi_truth.weights));
      PatchRecord rec;
      rec.patch_id = group + "_p" + std::to_string(p);
      rec.group_id = group;
      rec.label = truth.component_class[comp];
      rec.features.resize(config.dim);
      for (int j = 0; j < config.dim; ++j) {
        rec.features[j] = truth.component_means[comp][j] + config.shift_translation +
                          target_stddev * rng.next_normal();
      }
      target_records.push_back(std::move(rec));
    }
    truth.wsis.emplace(group, std::move(wsi_truth));
  }

  return SimResult{
      FeatureTable(std::move(source_records), config.dim, config.num_classes,
                   Domain::source),
      FeatureTable(std::move(target_records), config.dim, config.num_classes,
                   Domain::target),
      std::move(truth)};
}

std::map<std::string, double> truth_diversity(const SimTruth& truth) {
  std::map<std::string, double> out;
  for (const auto& [group_id, wsi] : truth.wsis) {
    out[group_id] = weight_entropy(wsi.weights);
  }
  return out;
}

std::string to_json_string(const SimConfig& c) {
  json j;
  j["num_classes"] = c.num_classes;
  j["components_per_class"] = c.components_per_class;
  j["dim"] = c.dim;
  j["source_priors"] = c.source_priors;
  j["target_priors"] = c.target_priors;
  j["shift_translation"] = c.shift_translation;
  j["shift_cov_scale"] = c.shift_cov_scale;
  j["source_wsis"] = c.source_wsis;
  j["target_wsis"] = c.target_wsis;
  j["min_patches_per_wsi"] = c.min_patches_per_wsi;
  j["max_patches_per_wsi"] = c.max_patches_per_wsi;
  j["alpha"] = c.alpha;
  j["component_spread"] = c.component_spread;
  j["component_stddev"] = c.component_stddev;
  j["min_component_separation"] = c.min_component_separation;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

SimConfig sim_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid sim config JSON: ") + e.what());
  }
  SimConfig c;  // absent keys keep their defaults
  for (const auto& [key, value] : j.items()) {
    if (key == "num_classes") c.num_classes = value.get<int>();
    else if (key == "components_per_class") c.components_per_class = value.get<int>();
    else if (key == "dim") c.dim = value.get<int>();
    else if (key == "source_priors") c.source_priors = value.get<std::vector<double>>();
    else if (key == "target_priors") c.target_priors = value.get<std::vector<double>>();
    else if (key == "shift_translation") c.shift_translation = value.get<double>();
    else if (key == "shift_cov_scale") c.shift_cov_scale = value.get<double>();
    else if (key == "source_wsis") c.source_wsis = value.get<int>();
    else if (key == "target_wsis") c.target_wsis = value.get<int>();
    else if (key == "min_patches_per_wsi") c.min_patches_per_wsi = value.get<int>();
    else if (key == "max_patches_per_wsi") c.max_patches_per_wsi = value.get<int>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "component_spread") c.component_spread = value.get<double>();
    else if (key == "component_stddev") c.component_stddev = value.get<double>();
    else if (key == "min_component_separation") c.min_component_separation = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw ConfigError("sim config: unknown key '" + key + "'");
  }
  return c;
}

std::string to_json_string(const SimTruth& truth) {
  json wsis = json::object();
  for (const auto& [group_id, wsi] : truth.wsis) {
    json entry;
    entry["weights"] = wsi.weights;
    entry["diversity"] = wsi.diversity;
    wsis[group_id] = entry;
  }
  json j;
  j["wsis"] = wsis;
  j["component_means"] = truth.component_means;
  j["component_class"] = truth.component_class;
  return j.dump(2) + "\n";
}

SimTruth sim_truth_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid truth JSON: ") + e.what());
  }
  SimTruth truth;
  truth.component_means =
      j.at("component_means").get<std::vector<std::vector<double>>>();
  truth.component_class = j.at("component_class").get<std::vector<int>>();
  for (const auto& [group_id, entry] : j.at("wsis").items()) {
    SimWsiTruth wsi;
    wsi.weights = entry.at("weights").get<std::vector<double>>();
    wsi.diversity = entry.at("diversity").get<double>();
    truth.wsis.emplace(group_id, std::move(wsi));
  }
  return truth;
}

void save_sim_truth(const SimTruth& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << to_json_string(truth);
}

SimTruth load_sim_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return sim_truth_from_json(text);
}

}  // namespace wsisel
