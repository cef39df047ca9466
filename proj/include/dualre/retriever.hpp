#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualre/encoder.hpp"
#include "dualre/predictor.hpp"
#include "dualre/types.hpp"
#include "dualre/vocab.hpp"

namespace dualre {

class Rng;

// Relevance scorer: each label owns an embedding row y and a mention scores
// sigma(z^T y) against it.
struct RetrieverModel {
  EncoderParams encoder;
  Eigen::MatrixXd relation_embeddings;  // |labels| x hidden

  static RetrieverModel init(const EncoderConfig& config, int vocab_size, int num_labels,
                             std::uint64_t seed);
  void check_dims(int vocab_size) const;
  int num_labels() const { return static_cast<int>(relation_embeddings.rows()); }
};

struct RetrieverGrad {
  EncoderGrad encoder;
  Eigen::MatrixXd relation_embeddings;

  static RetrieverGrad zeros_like(const RetrieverModel& model);
  bool finite() const;
};

// sigma(z^T y); always in (0, 1).
double relevance(const RetrieverModel& model, const Vocabulary& vocab,
                 const RelationMention& mention, int label);

// Relevance of every pool mention against every label (rows follow pool
// order). Encodes each mention exactly once.
Eigen::MatrixXd relevance_matrix(const RetrieverModel& model, const Vocabulary& vocab,
                                 const std::vector<RelationMention>& pool);

inline constexpr int kAllNegatives = -1;

// Pointwise ranking loss, weighted-mean over the batch:
//   loss = -(1/sum w) * sum_i w_i * [ln sigma(s_yi) + sum_{y'} ln(1 - sigma(s_y'))]
// where y' ranges over all labels != y_i (kAllNegatives) or over
// negatives_per_positive labels sampled without replacement from rng.
// grad is overwritten. Throws when the schema has a single label, the batch
// is empty, total weight is zero, or sampling is requested without an rng.
double pointwise_loss_and_grad(const RetrieverModel& model, const Vocabulary& vocab,
                               const std::vector<WeightedExample>& batch,
                               int negatives_per_positive, Rng* rng, RetrieverGrad& grad);

// One learning-to-rank pair: `positive` is an instance of `label`; the
// partner is either a negative instance (order_score 1) or another positive
// of the same label (order_score 1/2). Both encodings score against the
// same relation row.
struct RankPair {
  const RelationMention* positive = nullptr;
  const RelationMention* partner = nullptr;
  int label = -1;
  double order_score = 1.0;
  double weight = 1.0;  // promotion weight of the positive instance
};

// Pairwise ranking loss, weighted-mean over pairs:
//   loss = -(1/sum w) * sum_i w_i * r_i * ln sigma(z_i^T y - z'_i^T y).
// grad is overwritten. Throws on an empty pair set or zero total weight.
double pairwise_loss_and_grad(const RetrieverModel& model, const Vocabulary& vocab,
                              const std::vector<RankPair>& pairs, RetrieverGrad& grad);

// params <- params - lr * grad. Throws on non-finite gradients.
void sgd_step(RetrieverModel& model, const RetrieverGrad& grad, double learning_rate);

struct ScoredMention {
  std::string id;
  int pool_index = -1;
  double score = 0.0;
};

struct RetrievalResult {
  std::vector<std::vector<ScoredMention>> per_label;  // each descending, ties by id
  bool truncated = false;  // some quota exceeded the pool size
};

// Top-k_y pool mentions per label by relevance. quotas[y] >= 0, one entry
// per label. A mention may appear under several labels here; selection
// disambiguates.
RetrievalResult retrieve_per_relation(const RetrieverModel& model, const Vocabulary& vocab,
                                      const std::vector<RelationMention>& pool,
                                      const std::vector<int>& quotas);

// Same, over a precomputed relevance matrix (pool rows, label columns).
RetrievalResult retrieve_per_relation(const Eigen::MatrixXd& scores,
                                      const std::vector<RelationMention>& pool,
                                      const std::vector<int>& quotas);

struct RetrieverFitOptions {
  double learning_rate = 0.5;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;
  bool pairwise = false;
  int negatives_per_positive = kAllNegatives;  // pointwise only
  std::uint64_t seed = 0;
};

// Trains with the pointwise loss, or the pairwise loss with per-epoch pair
// sampling (2 negative partners + 1 positive partner per instance). Early
// stop mirrors fit_predictor, scoring dev by argmax-relevance prediction.
void fit_retriever(RetrieverModel& model, const Vocabulary& vocab,
                   const std::vector<WeightedExample>& train,
                   const std::vector<LabeledExample>& dev, const RelationSchema& schema,
                   const RetrieverFitOptions& options);

}  // namespace dualre
