#pragma once

#include <string>
#include <vector>

#include "dualre/predictor.hpp"
#include "dualre/retriever.hpp"
#include "dualre/types.hpp"

namespace dualre {

enum class DistributionMode { kTrue, kTopNk };

// Prior over labels used to portion retrieval quotas.
struct ReferenceDistribution {
  Eigen::VectorXd probs;  // one entry per label, non-negative, sums to 1
  DistributionMode mode = DistributionMode::kTrue;
  int n = 1;  // the n of top-nk
};

// true mode: empirical label frequencies of the labeled set.
// top-nk mode: empirical distribution of predicted labels among the n*k
// most confident pool predictions (whole pool when smaller). Throws on an
// empty labeled set (true) or an empty pool (top-nk).
ReferenceDistribution reference_distribution(DistributionMode mode, int n,
                                             const std::vector<LabeledExample>& labeled,
                                             const PredictorModel& predictor,
                                             const Vocabulary& vocab,
                                             const std::vector<RelationMention>& pool, int k,
                                             const RelationSchema& schema);

// k_y = largest-remainder apportionment of k' * probs; sums to k' exactly.
std::vector<int> quota_from_distribution(int k_prime, const ReferenceDistribution& dist);

struct SelectionConfig {
  int k = 1;
  double expansion_factor = 1.25;
  int max_expansions = 20;
  ReferenceDistribution distribution;
};

struct PromotedItem {
  std::string id;
  int pool_index = -1;
  int label = -1;
  double p_confidence = 0.0;
  double q_score = 0.0;
};

struct PromotedBatch {
  std::vector<PromotedItem> items;  // ranked; ids unique
};

// Joint selection: intersect the predictor's global top-k' (with predicted
// labels) against per-relation retrieval under quota k_y, where each
// retrieved mention is kept only under its highest-scoring retrieved label.
// Grows k' by ceil(expansion_factor * k') until the label-agreeing
// intersection reaches k, expansions run out, or k' covers the pool; then
// returns the top-k of the intersection by p*q (ties by ascending id).
PromotedBatch select_joint(const PredictorModel& predictor, const RetrieverModel& retriever,
                           const Vocabulary& vocab, const std::vector<RelationMention>& pool,
                           const SelectionConfig& config);

// Predictor-only top-k by confidence; q_score recorded as 1.
PromotedBatch select_single(const PredictorModel& predictor, const Vocabulary& vocab,
                            const std::vector<RelationMention>& pool, int k);

// Agreement of two predictors: the same expansion loop with the second
// predictor's top-k' confidence set standing in for retrieval; q_score is
// the second predictor's confidence.
PromotedBatch select_ensemble(const PredictorModel& first, const PredictorModel& second,
                              const Vocabulary& vocab,
                              const std::vector<RelationMention>& pool, int k,
                              double expansion_factor, int max_expansions);

}  // namespace dualre
