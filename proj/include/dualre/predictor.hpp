#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dualre/encoder.hpp"
#include "dualre/types.hpp"
#include "dualre/vocab.hpp"

namespace dualre {

// Softmax relation classifier on top of the mention encoder: p(y|x) =
// softmax(W z + b) over the schema's labels.
struct PredictorModel {
  EncoderParams encoder;
  Eigen::MatrixXd softmax_weights;  // |labels| x hidden
  Eigen::VectorXd softmax_bias;     // |labels|

  static PredictorModel init(const EncoderConfig& config, int vocab_size, int num_labels,
                             std::uint64_t seed);
  void check_dims(int vocab_size) const;
  int num_labels() const { return static_cast<int>(softmax_weights.rows()); }
};

struct PredictorGrad {
  EncoderGrad encoder;
  Eigen::MatrixXd softmax_weights;
  Eigen::VectorXd softmax_bias;

  static PredictorGrad zeros_like(const PredictorModel& model);
  bool finite() const;
};

// Normalized label distribution; entries positive, sum 1.
Eigen::VectorXd predict_proba(const PredictorModel& model, const Vocabulary& vocab,
                              const RelationMention& mention);

// A training example with its promotion weight (1 for original labels).
struct WeightedExample {
  const LabeledExample* example = nullptr;
  double weight = 1.0;
};

// Weighted-mean negative log likelihood over the batch:
//   loss = -(1/sum w) * sum_i w_i * ln p(y_i|x_i).
// grad is overwritten. Throws on an empty batch, non-finite or negative
// weights, or an all-zero total weight.
double nll_loss_and_grad(const PredictorModel& model, const Vocabulary& vocab,
                         const std::vector<WeightedExample>& batch, PredictorGrad& grad);

// params <- params - lr * grad. Throws on non-finite gradients.
void sgd_step(PredictorModel& model, const PredictorGrad& grad, double learning_rate);

struct RankedPrediction {
  std::string id;
  int pool_index = -1;
  int label = -1;        // argmax of predict_proba, ties to the lowest index
  double confidence = 0.0;  // max probability
};

// Descending by confidence, ties by ascending mention id.
std::vector<RankedPrediction> rank_unlabeled_by_confidence(
    const PredictorModel& model, const Vocabulary& vocab,
    const std::vector<RelationMention>& pool);

struct FitOptions {
  double learning_rate = 0.5;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;  // early stop on dev F1; ignored when dev is empty
  std::uint64_t seed = 0;
};

// Mini-batch SGD with per-example weights, warm-starting from the given
// model. With a non-empty dev set, keeps the best-dev-F1 snapshot and stops
// after `patience` epochs without improvement.
void fit_predictor(PredictorModel& model, const Vocabulary& vocab,
                   const std::vector<WeightedExample>& train,
                   const std::vector<LabeledExample>& dev, const RelationSchema& schema,
                   const FitOptions& options);

// Predicted labels for a mention set (argmax, ties to the lowest index).
std::vector<int> predict_labels(const PredictorModel& model, const Vocabulary& vocab,
                                const std::vector<const RelationMention*>& mentions);

}  // namespace dualre
