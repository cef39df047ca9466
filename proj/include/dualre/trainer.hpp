#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualre/evaluation.hpp"
#include "dualre/predictor.hpp"
#include "dualre/retriever.hpp"
#include "dualre/selection.hpp"
#include "dualre/types.hpp"

namespace dualre {

enum class Method { kDualRE, kDualREPairwise, kSelf, kEnsemble, kGold, kSupervised };

Method parse_method(const std::string& name);  // throws on unknown names
std::string method_name(Method method);

struct TrainConfig {
  EncoderConfig encoder;

  double learning_rate = 0.5;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;

  int negatives_per_positive = kAllNegatives;
  double retrieval_dropout = 0.0;  // accepted for grid compatibility; no effect

  double alpha = 1.0;
  double beta = 1.0;
  bool weighted_promotion = true;  // equal promotion forces both weights to 1

  int iterations_cap = 10;
  int k = 0;  // 0 = max(1, |U| / 10)
  double expansion_factor = 1.25;
  int max_expansions = 20;
  DistributionMode distribution_mode = DistributionMode::kTrue;
  int distribution_n = 1;
  int convergence_patience = 2;  // iterations without dev-F1 improvement

  std::uint64_t seed = 0;
};

// Applies one flat config key (the optim.*/promote.*/loop.*/select.*/
// model.*/retriever.*/seed family) onto a TrainConfig. Shared by the config
// file parser and grid search. Throws on unknown keys or bad values.
void apply_train_key(TrainConfig& config, const std::string& key, const std::string& value);

// The promoted items of one iteration with their frozen promotion weights.
struct PromotedAudit {
  std::string id;
  int label = -1;
  double p = 0.0;
  double q = 0.0;
  double weight_p = 1.0;
  double weight_q = 1.0;
};

// Row 0 covers pretraining (nothing promoted); rows 1.. cover loop turns.
struct IterationRecord {
  int iteration = 0;
  int n_pseudo = 0;              // |L_U| after this iteration's promotion
  double sel_precision = -1.0;   // negative = no sealed truth or nothing promoted
  ScoreReport dev;
  ScoreReport test;
  std::vector<PromotedAudit> promoted;
};

struct RunResult {
  Method method = Method::kSupervised;
  PredictorModel predictor;
  std::optional<PredictorModel> predictor_b;  // ensemble only
  std::optional<RetrieverModel> retriever;    // dualre only
  std::vector<IterationRecord> records;       // never empty
  Vocabulary vocab;
  RelationSchema schema;
};

ScoreReport evaluate_model(const PredictorModel& model, const Vocabulary& vocab,
                           const std::vector<LabeledExample>& data,
                           const RelationSchema& schema);

// Alternating E/M training with joint instance selection. `sealed` may be
// null (selection precision is then not recorded); test may be empty.
RunResult train_dualre(const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                       const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                       const TrainConfig& config, bool pairwise_retrieval);

// Single-model self-training: selection by predictor confidence only.
RunResult train_self(const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                     const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                     const TrainConfig& config);

// Two independently initialized predictors promoting their agreements.
RunResult train_ensemble(const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                         const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                         const TrainConfig& config);

// Upper bound: one supervised fit on L plus the pool under its sealed gold
// labels. Throws when sealed is missing an unlabeled id.
RunResult train_gold(const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                     const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                     const TrainConfig& config);

// Lower bound: one supervised fit on L alone.
RunResult train_supervised(const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                           const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                           const TrainConfig& config);

RunResult train(Method method, const CorpusState& corpus,
                const std::vector<LabeledExample>& dev,
                const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                const TrainConfig& config);

// Pretrains the method's models on L (same seed streams as train) and runs
// one selection over the pool, i.e. the batch the first loop turn would
// promote. Supervised/gold have no selection step and throw.
PromotedBatch pretrain_and_select(Method method, const CorpusState& corpus,
                                  const std::vector<LabeledExample>& dev,
                                  const TrainConfig& config);

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

struct GridPoint {
  std::string description;  // "key=value key=value"
  TrainConfig config;
  double dev_f1 = 0.0;
};

struct GridResult {
  int best_index = -1;  // into points
  std::vector<GridPoint> points;
};

// Evaluates configurations by final dev F1: the full cross-product, or a
// greedy per-axis sweep (later axes hold their defaults until reached).
// Ties go to the earlier point. `jobs` bounds parallel runs.
GridResult grid_search(Method method, const CorpusState& corpus,
                       const std::vector<LabeledExample>& dev,
                       const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                       const TrainConfig& base, const std::vector<GridAxis>& axes,
                       bool greedy, int jobs);

}  // namespace dualre
