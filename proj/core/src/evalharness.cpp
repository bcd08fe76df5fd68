#include "wsisel/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#include "wsisel/rng.hpp"

namespace wsisel {

using json = nlohmann::json;

const char* to_string(Condition c) {
  switch (c) {
    case Condition::s_to_t: return "s_to_t";
    case Condition::high: return "high";
    case Condition::med: return "med";
    case Condition::low: return "low";
    case Condition::t_to_t: return "t_to_t";
  }
  return "?";
}

Condition condition_from_string(const std::string& name) {
  if (name == "s_to_t") return Condition::s_to_t;
  if (name == "high") return Condition::high;
  if (name == "med") return Condition::med;
  if (name == "low") return Condition::low;
  if (name == "t_to_t") return Condition::t_to_t;
  throw IngestError("unknown condition '" + name + "'");
}

const ConditionSummary& ExperimentSummary::condition(Condition c) const {
  for (const ConditionSummary& s : conditions) {
    if (s.condition == c) return s;
  }
  throw LookupError(std::string("no summary for condition ") + to_string(c));
}

namespace {

std::vector<std::int64_t> label_counts(const FeatureTable& table) {
  std::vector<std::int64_t> counts(table.num_classes(), 0);
  for (const PatchRecord& r : table.records()) {
    if (!r.label) {
      throw LabelError("record '" + r.patch_id + "' is unlabeled");
    }
    ++counts[*r.label];
  }
  return counts;
}

void shuffle_indices(std::vector<std::size_t>& idx, Xoshiro256ss& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

double sample_mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double total = 0.0;
  for (double x : xs) total += (x - mean) * (x - mean);
  return total / static_cast<double>(xs.size() - 1);
}

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double beta_cf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3e-16;
  const double fpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

void fill_stats(ConditionSummary& s) {
  s.mean_miou = sample_mean(s.miou);
  s.std_miou = std::sqrt(sample_variance(s.miou, s.mean_miou));
  s.mean_mdice = sample_mean(s.mdice);
  s.std_mdice = std::sqrt(sample_variance(s.mdice, s.mean_mdice));
  s.mean_mprecision = sample_mean(s.mprecision);
  s.std_mprecision = std::sqrt(sample_variance(s.mprecision, s.mean_mprecision));
  s.mean_mrecall = sample_mean(s.mrecall);
  s.std_mrecall = std::sqrt(sample_variance(s.mrecall, s.mean_mrecall));
}

}  // namespace

FeatureTable rebalance(const FeatureTable& table, std::uint64_t seed) {
  if (table.size() == 0) throw ConfigError("rebalance: empty table");
  const std::vector<std::int64_t> counts = label_counts(table);  // LabelError if unlabeled

  double log_sum = 0.0;
  int present = 0;
  for (std::int64_t c : counts) {
    if (c > 0) {
      log_sum += std::log(static_cast<double>(c));
      ++present;
    }
  }
  const std::int64_t goal =
      std::max<std::int64_t>(1, std::llround(std::exp(log_sum / present)));

  std::vector<std::vector<std::size_t>> rows_by_class(table.num_classes());
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows_by_class[*table.record(i).label].push_back(i);
  }

  Xoshiro256ss rng(seed);
  std::vector<PatchRecord> out;
  std::unordered_map<std::string, int> dup_count;
  auto push = [&](std::size_t row) {
    PatchRecord rec = table.record(row);
    const int k = dup_count[rec.patch_id]++;
    if (k > 0) rec.patch_id += "~" + std::to_string(k);
    out.push_back(std::move(rec));
  };

  for (int c = 0; c < table.num_classes(); ++c) {
    std::vector<std::size_t>& rows = rows_by_class[c];
    const std::int64_t have = static_cast<std::int64_t>(rows.size());
    if (have == 0) continue;
    if (have > goal) {
      // Under-sample: partial Fisher-Yates, first `goal` entries.
      for (std::int64_t i = 0; i < goal; ++i) {
        const std::size_t j = i + rng.next_below(static_cast<std::uint64_t>(have - i));
        std::swap(rows[i], rows[j]);
        push(rows[i]);
      }
    } else {
      for (std::size_t row : rows) push(row);
      // Over-sample: draw the shortfall with replacement.
      for (std::int64_t i = have; i < goal; ++i) {
        push(rows[rng.next_below(static_cast<std::uint64_t>(have))]);
      }
    }
  }
  return FeatureTable(std::move(out), table.dim(), table.num_classes(),
                      table.domain());
}

namespace {

// Softmax probabilities for one record under C x (dim+1) weights.
std::vector<double> softmax_scores(const std::vector<std::vector<double>>& weights,
                                   const std::vector<double>& x) {
  const std::size_t num_classes = weights.size();
  const std::size_t dim = x.size();
  std::vector<double> z(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    double acc = weights[c][dim];  // bias
    for (std::size_t j = 0; j < dim; ++j) acc += weights[c][j] * x[j];
    z[c] = acc;
  }
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

}  // namespace

double batch_loss(const std::vector<std::vector<double>>& weights,
                  const FeatureTable& table, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw ConfigError("batch_loss: empty batch");
  double loss = 0.0;
  for (std::size_t row : rows) {
    const PatchRecord& r = table.record(row);
    if (!r.label) throw LabelError("batch_loss: unlabeled record '" + r.patch_id + "'");
    const std::vector<double> p = softmax_scores(weights, r.features);
    loss -= std::log(std::max(p[*r.label], 1e-300));
  }
  return loss / static_cast<double>(rows.size());
}

std::vector<std::vector<double>> batch_gradient(
    const std::vector<std::vector<double>>& weights, const FeatureTable& table,
    const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw ConfigError("batch_gradient: empty batch");
  const std::size_t num_classes = weights.size();
  const std::size_t dim = weights[0].size() - 1;
  std::vector<std::vector<double>> grad(num_classes, std::vector<double>(dim + 1, 0.0));
  for (std::size_t row : rows) {
    const PatchRecord& r = table.record(row);
    if (!r.label) throw LabelError("batch_gradient: unlabeled record '" + r.patch_id + "'");
    const std::vector<double> p = softmax_scores(weights, r.features);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double coeff = p[c] - (static_cast<int>(c) == *r.label ? 1.0 : 0.0);
      for (std::size_t j = 0; j < dim; ++j) grad[c][j] += coeff * r.features[j];
      grad[c][dim] += coeff;
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& row : grad) {
    for (double& v : row) v *= inv;
  }
  return grad;
}

Classifier train(const FeatureTable& primary, const FeatureTable* extra_target,
                 const TrainConfig& config, std::uint64_t seed,
                 const FeatureTable* validation) {
  if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (config.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(config.learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (extra_target && extra_target->dim() != primary.dim()) {
    throw DimensionError("train: primary and extra_target dims differ");
  }
  if (extra_target && extra_target->num_classes() != primary.num_classes()) {
    throw DimensionError("train: primary and extra_target class counts differ");
  }

  Classifier model;
  model.num_classes = primary.num_classes();
  model.dim = primary.dim();
  model.config = config;
  model.seed = seed;
  model.weights.assign(model.num_classes, std::vector<double>(model.dim + 1, 0.0));

  // Half a batch comes from each pool when a target WSI is present;
  // otherwise the whole step uses half-size source-only batches, so every
  // condition sees the same number of source patches per epoch.
  const std::size_t half = std::max(1, config.batch_size / 2);

  Classifier best = model;
  double best_miou = -1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const FeatureTable pool_a = rebalance(primary, derive_seed(seed, epoch, 1));
    std::vector<std::size_t> idx_a(pool_a.size());
    for (std::size_t i = 0; i < idx_a.size(); ++i) idx_a[i] = i;
    Xoshiro256ss epoch_rng(derive_seed(seed, epoch, 0));
    shuffle_indices(idx_a, epoch_rng);

    std::optional<FeatureTable> pool_b;
    std::vector<std::size_t> idx_b;
    std::size_t cursor_b = 0;
    if (extra_target) {
      pool_b = rebalance(*extra_target, derive_seed(seed, epoch, 2));
      idx_b.resize(pool_b->size());
      for (std::size_t i = 0; i < idx_b.size(); ++i) idx_b[i] = i;
      shuffle_indices(idx_b, epoch_rng);
    }

    const std::size_t steps = std::max<std::size_t>(1, idx_a.size() / half);
    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<std::size_t> batch_a;
      const std::size_t begin = step * half;
      for (std::size_t i = begin; i < std::min(begin + half, idx_a.size()); ++i) {
        batch_a.push_back(idx_a[i]);
      }
      if (batch_a.empty()) break;

      auto grad = batch_gradient(model.weights, pool_a, batch_a);

      if (pool_b) {
        std::vector<std::size_t> batch_b;
        for (std::size_t i = 0; i < half; ++i) {
          if (cursor_b == idx_b.size()) {
            shuffle_indices(idx_b, epoch_rng);
            cursor_b = 0;
          }
          batch_b.push_back(idx_b[cursor_b++]);
        }
        const auto grad_b = batch_gradient(model.weights, *pool_b, batch_b);
        // Equal-weight average of the two half-batch gradients = gradient
        // of the combined 32+32 batch when the halves are equal sized.
        for (std::size_t c = 0; c < grad.size(); ++c) {
          for (std::size_t j = 0; j < grad[c].size(); ++j) {
            grad[c][j] = 0.5 * (grad[c][j] + grad_b[c][j]);
          }
        }
      }

      for (std::size_t c = 0; c < grad.size(); ++c) {
        for (std::size_t j = 0; j < grad[c].size(); ++j) {
          model.weights[c][j] -= config.learning_rate * grad[c][j];
          if (!std::isfinite(model.weights[c][j])) {
            throw NumericError("train: divergence (non-finite weight) at epoch " +
                               std::to_string(epoch));
          }
        }
      }
    }

    if (config.early_stop && validation) {
      const EvalReport report = evaluate(model, *validation);
      if (report.m_iou > best_miou) {
        best_miou = report.m_iou;
        best = model;
      }
    }
  }

  if (config.early_stop && validation && best_miou >= 0.0) return best;
  return model;
}

std::vector<double> class_probabilities(const Classifier& model,
                                        const std::vector<double>& features) {
  if (features.size() != static_cast<std::size_t>(model.dim)) {
    throw DimensionError("class_probabilities: feature dim mismatch");
  }
  return softmax_scores(model.weights, features);
}

int predict(const Classifier& model, const std::vector<double>& features) {
  const std::vector<double> p = class_probabilities(model, features);
  int best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = static_cast<int>(c);
  }
  return best;
}

EvalReport evaluate(const Classifier& model, const FeatureTable& test) {
  if (test.size() == 0) throw ConfigError("evaluate: empty test set");
  if (test.dim() != model.dim) throw DimensionError("evaluate: feature dim mismatch");
  const int num_classes = model.num_classes;

  EvalReport report;
  report.confusion.assign(num_classes, std::vector<std::int64_t>(num_classes, 0));
  for (const PatchRecord& r : test.records()) {
    if (!r.label) throw LabelError("evaluate: unlabeled record '" + r.patch_id + "'");
    ++report.confusion[*r.label][predict(model, r.features)];
  }

  report.precision.assign(num_classes, 0.0);
  report.recall.assign(num_classes, 0.0);
  report.dice.assign(num_classes, 0.0);
  report.iou.assign(num_classes, 0.0);
  report.present.assign(num_classes, false);

  int present_count = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double tp = static_cast<double>(report.confusion[c][c]);
    double fp = 0.0, fn = 0.0;
    for (int other = 0; other < num_classes; ++other) {
      if (other == c) continue;
      fp += static_cast<double>(report.confusion[other][c]);
      fn += static_cast<double>(report.confusion[c][other]);
    }
    report.present[c] = (tp + fn) > 0.0;
    if (!report.present[c]) continue;  // absent classes stay out of the macro mean
    ++present_count;
    report.precision[c] = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
    report.recall[c] = tp / (tp + fn);
    report.dice[c] = (2.0 * tp + fp + fn) > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    report.iou[c] = (tp + fp + fn) > 0.0 ? tp / (tp + fp + fn) : 0.0;
    report.m_precision += report.precision[c];
    report.m_recall += report.recall[c];
    report.m_dice += report.dice[c];
    report.m_iou += report.iou[c];
  }
  report.m_precision /= present_count;
  report.m_recall /= present_count;
  report.m_dice /= present_count;
  report.m_iou /= present_count;
  return report;
}

WelchResult welch_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ConfigError("welch_test: both samples need at least 2 values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = sample_mean(a);
  const double mb = sample_mean(b);
  const double va = sample_variance(a, ma);
  const double vb = sample_variance(b, mb);
  if (va == 0.0 && vb == 0.0) {
    throw ConfigError("welch_test: zero variance in both samples");
  }
  const double sea = va / na;
  const double seb = vb / nb;
  WelchResult result;
  result.t = (ma - mb) / std::sqrt(sea + seb);
  result.df = (sea + seb) * (sea + seb) /
              (sea * sea / (na - 1.0) + seb * seb / (nb - 1.0));
  if (result.t == 0.0) {
    result.p = 1.0;
  } else {
    const double x = result.df / (result.df + result.t * result.t);
    result.p = reg_incomplete_beta(result.df / 2.0, 0.5, x);
  }
  return result;
}

void ensure_disjoint_groups(const std::vector<const FeatureTable*>& train_tables,
                            const FeatureTable& test) {
  std::unordered_set<std::string> test_groups(test.group_order().begin(),
                                              test.group_order().end());
  for (const FeatureTable* table : train_tables) {
    for (const std::string& group : table->group_order()) {
      if (test_groups.count(group)) {
        throw LeakageError("train group '" + group + "' also appears in the test set");
      }
    }
  }
}

ExperimentSummary run_experiment(const FeatureTable& source,
                                 const FeatureTable& target,
                                 const RankedSelection& ranking,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ExperimentConfig& config) {
  if (seeds.empty()) throw ConfigError("run_experiment: no seeds");
  if (ranking.high.empty() || ranking.med.empty() || ranking.low.empty()) {
    throw ConfigError("run_experiment: ranking has an empty slice");
  }
  for (const GroupEntropy& ge : ranking.ordered) {
    target.group_rows(ge.group_id);  // every ranked group must exist
  }

  // Candidate WSIs never enter validation or test.
  std::unordered_set<std::string> candidates;
  for (const auto* slice : {&ranking.high, &ranking.med, &ranking.low}) {
    candidates.insert(slice->begin(), slice->end());
  }
  std::vector<std::string> rest;
  for (const std::string& group : target.group_order()) {
    if (!candidates.count(group)) rest.push_back(group);
  }
  if (rest.size() < 2) {
    throw ConfigError("run_experiment: not enough non-candidate WSIs to split");
  }

  std::size_t val_count = static_cast<std::size_t>(
      std::llround(config.validation_fraction * static_cast<double>(target.group_count())));
  if (val_count >= rest.size()) val_count = rest.size() - 1;

  std::vector<std::size_t> order(rest.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Xoshiro256ss split_rng(config.split_seed);
  shuffle_indices(order, split_rng);

  ExperimentSummary summary;
  summary.seeds = seeds;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    (i < val_count ? summary.validation_groups : summary.test_groups)
        .push_back(rest[order[i]]);
  }
  std::sort(summary.validation_groups.begin(), summary.validation_groups.end());
  std::sort(summary.test_groups.begin(), summary.test_groups.end());

  const FeatureTable test = subset_groups(target, summary.test_groups);
  const FeatureTable validation =
      summary.validation_groups.empty()
          ? test  // unused unless early_stop is on and groups exist
          : subset_groups(target, summary.validation_groups);

  // t_to_t oracle trains on every target WSI outside the test split.
  std::vector<std::string> oracle_groups;
  for (const std::string& group : target.group_order()) {
    if (std::find(summary.test_groups.begin(), summary.test_groups.end(), group) ==
        summary.test_groups.end()) {
      oracle_groups.push_back(group);
    }
  }
  const FeatureTable oracle_pool = subset_groups(target, oracle_groups);

  const std::vector<Condition> all_conditions = {
      Condition::s_to_t, Condition::high, Condition::med, Condition::low,
      Condition::t_to_t};

  for (Condition condition : all_conditions) {
    ConditionSummary cs;
    cs.condition = condition;
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      const std::uint64_t seed = seeds[j];
      const FeatureTable* val_ptr =
          config.train.early_stop && !summary.validation_groups.empty() ? &validation
                                                                        : nullptr;
      Classifier model;
      if (condition == Condition::s_to_t) {
        ensure_disjoint_groups({&source}, test);
        model = train(source, nullptr, config.train, seed, val_ptr);
      } else if (condition == Condition::t_to_t) {
        ensure_disjoint_groups({&oracle_pool}, test);
        model = train(oracle_pool, nullptr, config.train, seed, val_ptr);
      } else {
        const std::vector<std::string>& slice = condition == Condition::high
                                                    ? ranking.high
                                                    : condition == Condition::med
                                                          ? ranking.med
                                                          : ranking.low;
        const std::string& wsi = slice[j % slice.size()];
        const FeatureTable annotated = split_group(target, wsi);
        ensure_disjoint_groups({&source, &annotated}, test);
        model = train(source, &annotated, config.train, seed, val_ptr);
        cs.wsi_used.push_back(wsi);
      }
      const EvalReport report = evaluate(model, test);
      cs.miou.push_back(report.m_iou);
      cs.mdice.push_back(report.m_dice);
      cs.mprecision.push_back(report.m_precision);
      cs.mrecall.push_back(report.m_recall);
    }
    fill_stats(cs);
    summary.conditions.push_back(std::move(cs));
  }

  const std::vector<std::pair<Condition, Condition>> pairs = {
      {Condition::high, Condition::med},
      {Condition::high, Condition::low},
      {Condition::med, Condition::low}};
  for (const auto& [a, b] : pairs) {
    PairwiseTest pt;
    pt.a = a;
    pt.b = b;
    const std::vector<double>& xa = summary.condition(a).miou;
    const std::vector<double>& xb = summary.condition(b).miou;
    const double ma = sample_mean(xa);
    const double mb = sample_mean(xb);
    if (sample_variance(xa, ma) == 0.0 && sample_variance(xb, mb) == 0.0) {
      // Welch is undefined on two constant samples; use its limit.
      pt.welch.t = ma == mb ? 0.0 : (ma > mb ? 1.0 : -1.0) *
                                        std::numeric_limits<double>::infinity();
      pt.welch.df = static_cast<double>(xa.size() + xb.size() - 2);
      pt.welch.p = ma == mb ? 1.0 : 0.0;
    } else {
      pt.welch = welch_test(xa, xb);
    }
    pt.p_adjusted = std::min(1.0, pt.welch.p * static_cast<double>(pairs.size()));
    pt.significant = pt.p_adjusted < config.significance_level;
    summary.pairwise.push_back(pt);
  }
  return summary;
}

std::string to_json_string(const ExperimentSummary& summary) {
  json conditions = json::array();
  for (const ConditionSummary& cs : summary.conditions) {
    json c;
    c["condition"] = to_string(cs.condition);
    c["miou"] = cs.miou;
    c["mdice"] = cs.mdice;
    c["mprecision"] = cs.mprecision;
    c["mrecall"] = cs.mrecall;
    c["wsi_used"] = cs.wsi_used;
    c["mean_miou"] = cs.mean_miou;
    c["std_miou"] = cs.std_miou;
    c["mean_mdice"] = cs.mean_mdice;
    c["std_mdice"] = cs.std_mdice;
    c["mean_mprecision"] = cs.mean_mprecision;
    c["std_mprecision"] = cs.std_mprecision;
    c["mean_mrecall"] = cs.mean_mrecall;
    c["std_mrecall"] = cs.std_mrecall;
    conditions.push_back(c);
  }
  json pairwise = json::array();
  for (const PairwiseTest& pt : summary.pairwise) {
    json p;
    p["a"] = to_string(pt.a);
    p["b"] = to_string(pt.b);
    p["t"] = pt.welch.t;
    p["df"] = pt.welch.df;
    p["p"] = pt.welch.p;
    p["p_adjusted"] = pt.p_adjusted;
    p["significant"] = pt.significant;
    pairwise.push_back(p);
  }
  json j;
  j["conditions"] = conditions;
  j["pairwise"] = pairwise;
  j["validation_groups"] = summary.validation_groups;
  j["test_groups"] = summary.test_groups;
  j["seeds"] = summary.seeds;
  return j.dump(2) + "\n";
}

ExperimentSummary experiment_summary_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid experiment summary JSON: ") + e.what());
  }
  ExperimentSummary summary;
  for (const json& c : j.at("conditions")) {
    ConditionSummary cs;
    cs.condition = condition_from_string(c.at("condition").get<std::string>());
    cs.miou = c.at("miou").get<std::vector<double>>();
    cs.mdice = c.at("mdice").get<std::vector<double>>();
    cs.mprecision = c.at("mprecision").get<std::vector<double>>();
    cs.mrecall = c.at("mrecall").get<std::vector<double>>();
    cs.wsi_used = c.at("wsi_used").get<std::vector<std::string>>();
    cs.mean_miou = c.at("mean_miou").get<double>();
    cs.std_miou = c.at("std_miou").get<double>();
    cs.mean_mdice = c.at("mean_mdice").get<double>();
    cs.std_mdice = c.at("std_mdice").get<double>();
    cs.mean_mprecision = c.at("mean_mprecision").get<double>();
    cs.std_mprecision = c.at("std_mprecision").get<double>();
    cs.mean_mrecall = c.at("mean_mrecall").get<double>();
    cs.std_mrecall = c.at("std_mrecall").get<double>();
    summary.conditions.push_back(std::move(cs));
  }
  for (const json& p : j.at("pairwise")) {
    PairwiseTest pt;
    pt.a = condition_from_string(p.at("a").get<std::string>());
    pt.b = condition_from_string(p.at("b").get<std::string>());
    pt.welch.t = p.at("t").get<double>();
    pt.welch.df = p.at("df").get<double>();
    pt.welch.p = p.at("p").get<double>();
    pt.p_adjusted = p.at("p_adjusted").get<double>();
    pt.significant = p.at("significant").get<bool>();
    summary.pairwise.push_back(pt);
  }
  summary.validation_groups = j.at("validation_groups").get<std::vector<std::string>>();
  summary.test_groups = j.at("test_groups").get<std::vector<std::string>>();
  summary.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  return summary;
}

void save_experiment_summary(const ExperimentSummary& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << to_json_string(summary);
}

ExperimentSummary load_experiment_summary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return experiment_summary_from_json(text);
}

}  // namespace wsisel
