#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsisel/dataset.hpp"
#include "wsisel/entropy.hpp"

namespace wsisel {

/// Mini-batch gradient descent settings for the linear softmax head that
/// stands in for CNN fine-tuning at desk scale.
struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 40;
  int batch_size = 64;      // mixed batches are half source, half target
  bool early_stop = false;  // keep the weights with the best validation mIoU
};

/// Multinomial logistic regression: per-class linear scores with bias.
struct Classifier {
  std::vector<std::vector<double>> weights;  // C rows of (dim + 1), bias last
  int num_classes = 0;
  int dim = 0;
  TrainConfig config;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<std::vector<std::int64_t>> confusion;  // rows truth, cols prediction
  std::vector<double> precision, recall, dice, iou;  // per class
  std::vector<bool> present;                         // class occurs in truth
  double m_precision = 0.0, m_recall = 0.0, m_dice = 0.0, m_iou = 0.0;
};

enum class Condition { s_to_t, high, med, low, t_to_t };

const char* to_string(Condition c);
Condition condition_from_string(const std::string& name);

struct ConditionSummary {
  Condition condition = Condition::s_to_t;
  std::vector<double> miou, mdice, mprecision, mrecall;  // one entry per seed
  std::vector<std::string> wsi_used;  // annotated WSI per seed (slice conditions)
  double mean_miou = 0.0, std_miou = 0.0;
  double mean_mdice = 0.0, std_mdice = 0.0;
  double mean_mprecision = 0.0, std_mprecision = 0.0;
  double mean_mrecall = 0.0, std_mrecall = 0.0;
};

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

struct PairwiseTest {
  Condition a = Condition::high;
  Condition b = Condition::low;
  WelchResult welch;         // on the per-seed mIoU lists
  double p_adjusted = 1.0;   // Bonferroni over the three slice pairs
  bool significant = false;
};

struct ExperimentConfig {
  TrainConfig train;
  double validation_fraction = 0.2;  // share of target WSIs held out of test
  std::uint64_t split_seed = 1;
  double significance_level = 0.05;
};

struct ExperimentSummary {
  std::vector<ConditionSummary> conditions;
  std::vector<PairwiseTest> pairwise;
  std::vector<std::string> validation_groups;
  std::vector<std::string> test_groups;
  std::vector<std::uint64_t> seeds;

  const ConditionSummary& condition(Condition c) const;
};

/// Over/under-sample every present class to the geometric mean of the
/// class counts: minority classes grow by sampling with replacement,
/// majority classes shrink by sampling without. Duplicated records get a
/// "~k" patch_id suffix to keep ids unique. Deterministic given seed.
FeatureTable rebalance(const FeatureTable& table, std::uint64_t seed);

/// Mean cross-entropy of the rows under softmax(weights * [x;1]).
double batch_loss(const std::vector<std::vector<double>>& weights,
                  const FeatureTable& table, const std::vector<std::size_t>& rows);

/// Analytic gradient of batch_loss, same shape as weights.
std::vector<std::vector<double>> batch_gradient(
    const std::vector<std::vector<double>>& weights, const FeatureTable& table,
    const std::vector<std::size_t>& rows);

/// Train on `primary` (plus, when given, `extra_target`: every batch is
/// then composed half and half from the two per-epoch rebalanced pools).
/// Weights start at zero, so a 0-epoch classifier is exactly uniform.
Classifier train(const FeatureTable& primary, const FeatureTable* extra_target,
                 const TrainConfig& config, std::uint64_t seed,
                 const FeatureTable* validation = nullptr);

std::vector<double> class_probabilities(const Classifier& model,
                                        const std::vector<double>& features);
int predict(const Classifier& model, const std::vector<double>& features);

/// Confusion matrix and per-class precision/recall/Dice/IoU with macro
/// means over the classes present in the truth. Zero-denominator metrics
/// are 0 and still count toward the macro mean.
EvalReport evaluate(const Classifier& model, const FeatureTable& test);

/// Two-sided Welch's t-test with Welch-Satterthwaite degrees of freedom.
WelchResult welch_test(const std::vector<double>& a, const std::vector<double>& b);

/// Throws LeakageError if any train table shares a group id with `test`.
void ensure_disjoint_groups(const std::vector<const FeatureTable*>& train_tables,
                            const FeatureTable& test);

/// Full protocol: source-only baseline, source + one WSI from each
/// entropy slice (rotating through the slice across seeds), and the
/// target-trained oracle, each trained per seed and evaluated on the
/// held-out target test groups.
ExperimentSummary run_experiment(const FeatureTable& source,
                                 const FeatureTable& target,
                                 const RankedSelection& ranking,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ExperimentConfig& config);

std::string to_json_string(const ExperimentSummary& summary);
ExperimentSummary experiment_summary_from_json(const std::string& text);
void save_experiment_summary(const ExperimentSummary& summary, const std::string& path);
ExperimentSummary load_experiment_summary(const std::string& path);

}  // namespace wsisel
