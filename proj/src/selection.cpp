#include "dualre/selection.hpp"

#include <algorithm>
#include <cmath>

#include "dualre/apportion.hpp"

namespace dualre {
namespace {

void check_selection_args(std::size_t pool_size, int k, double expansion_factor,
                          int max_expansions) {
  if (pool_size == 0) throw std::invalid_argument("selection: empty pool");
  if (k < 1) throw std::invalid_argument("selection: k must be at least 1");
  if (!(expansion_factor > 1.0))
    throw std::invalid_argument("selection: expansion factor must exceed 1");
  if (max_expansions < 0)
    throw std::invalid_argument("selection: max_expansions must be non-negative");
}

int expand(int k_prime, double factor) {
  const int next = static_cast<int>(std::ceil(factor * k_prime));
  return std::max(k_prime + 1, next);
}

// Rank by p*q descending, ties by ascending id; keep at most k.
void finalize(std::vector<PromotedItem>& items, int k) {
  std::sort(items.begin(), items.end(), [](const PromotedItem& a, const PromotedItem& b) {
    const double pa = a.p_confidence * a.q_score;
    const double pb = b.p_confidence * b.q_score;
    if (pa != pb) return pa > pb;
    return a.id < b.id;
  });
  if (static_cast<int>(items.size()) > k) items.resize(k);
}

}  // namespace

ReferenceDistribution reference_distribution(DistributionMode mode, int n,
                                             const std::vector<LabeledExample>& labeled,
                                             const PredictorModel& predictor,
                                             const Vocabulary& vocab,
                                             const std::vector<RelationMention>& pool, int k,
                                             const RelationSchema& schema) {
  ReferenceDistribution dist;
  dist.mode = mode;
  dist.n = n;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(schema.size());
  if (mode == DistributionMode::kTrue) {
    if (labeled.empty())
      throw std::invalid_argument("reference distribution: empty labeled set");
    for (const auto& ex : labeled) counts(ex.label) += 1.0;
  } else {
    if (n < 1) throw std::invalid_argument("reference distribution: n must be at least 1");
    if (k < 1) throw std::invalid_argument("reference distribution: k must be at least 1");
    if (pool.empty())
      throw std::invalid_argument("reference distribution: empty pool in top-nk mode");
    const auto ranked = rank_unlabeled_by_confidence(predictor, vocab, pool);
    const std::size_t take = std::min<std::size_t>(ranked.size(),
                                                   static_cast<std::size_t>(n) * k);
    for (std::size_t i = 0; i < take; ++i) counts(ranked[i].label) += 1.0;
  }
  dist.probs = counts / counts.sum();
  return dist;
}

std::vector<int> quota_from_distribution(int k_prime, const ReferenceDistribution& dist) {
  if (k_prime < 1) throw std::invalid_argument("quota: k' must be at least 1");
  if (std::abs(dist.probs.sum() - 1.0) > 1e-6)
    throw std::invalid_argument("quota: distribution does not sum to 1");
  std::vector<double> targets(dist.probs.size());
  for (Eigen::Index y = 0; y < dist.probs.size(); ++y) targets[y] = k_prime * dist.probs(y);
  return apportion_largest_remainder(targets, k_prime);
}

PromotedBatch select_joint(const PredictorModel& predictor, const RetrieverModel& retriever,
                           const Vocabulary& vocab, const std::vector<RelationMention>& pool,
                           const SelectionConfig& config) {
  check_selection_args(pool.size(), config.k, config.expansion_factor, config.max_expansions);
  const int n = static_cast<int>(pool.size());
  const auto ranked = rank_unlabeled_by_confidence(predictor, vocab, pool);
  const Eigen::MatrixXd scores = relevance_matrix(retriever, vocab, pool);

  std::vector<PromotedItem> items;
  int k_prime = config.k;
  for (int expansions = 0;; ++expansions) {
    const auto quota = quota_from_distribution(k_prime, config.distribution);
    const auto retrieved = retrieve_per_relation(scores, pool, quota);

    // Each retrieved mention kept only under its highest-scoring retrieved
    // label; score ties go to the lower label index.
    std::vector<int> kept_label(pool.size(), -1);
    for (std::size_t y = 0; y < retrieved.per_label.size(); ++y) {
      for (const auto& sm : retrieved.per_label[y]) {
        const int cur = kept_label[sm.pool_index];
        if (cur == -1 || scores(sm.pool_index, y) > scores(sm.pool_index, cur))
          kept_label[sm.pool_index] = static_cast<int>(y);
      }
    }

    items.clear();
    const int top = std::min(k_prime, n);
    for (int i = 0; i < top; ++i) {
      const auto& rp = ranked[i];
      if (kept_label[rp.pool_index] != rp.label) continue;
      items.push_back(
          {rp.id, rp.pool_index, rp.label, rp.confidence, scores(rp.pool_index, rp.label)});
    }
    if (static_cast<int>(items.size()) >= config.k || expansions >= config.max_expansions ||
        k_prime >= n)
      break;
    k_prime = expand(k_prime, config.expansion_factor);
  }
  finalize(items, config.k);
  return {std::move(items)};
}

PromotedBatch select_single(const PredictorModel& predictor, const Vocabulary& vocab,
                            const std::vector<RelationMention>& pool, int k) {
  if (pool.empty()) throw std::invalid_argument("selection: empty pool");
  if (k < 1) throw std::invalid_argument("selection: k must be at least 1");
  const auto ranked = rank_unlabeled_by_confidence(predictor, vocab, pool);
  PromotedBatch batch;
  const int take = std::min<int>(k, static_cast<int>(ranked.size()));
  batch.items.reserve(take);
  for (int i = 0; i < take; ++i)
    batch.items.push_back({ranked[i].id, ranked[i].pool_index, ranked[i].label,
                           ranked[i].confidence, 1.0});
  return batch;
}

PromotedBatch select_ensemble(const PredictorModel& first, const PredictorModel& second,
                              const Vocabulary& vocab,
                              const std::vector<RelationMention>& pool, int k,
                              double expansion_factor, int max_expansions) {
  check_selection_args(pool.size(), k, expansion_factor, max_expansions);
  const int n = static_cast<int>(pool.size());
  const auto ranked_a = rank_unlabeled_by_confidence(first, vocab, pool);
  const auto ranked_b = rank_unlabeled_by_confidence(second, vocab, pool);

  std::vector<PromotedItem> items;
  int k_prime = k;
  for (int expansions = 0;; ++expansions) {
    const int top = std::min(k_prime, n);
    std::vector<int> b_label(pool.size(), -1);
    std::vector<double> b_conf(pool.size(), 0.0);
    for (int i = 0; i < top; ++i) {
      b_label[ranked_b[i].pool_index] = ranked_b[i].label;
      b_conf[ranked_b[i].pool_index] = ranked_b[i].confidence;
    }
    items.clear();
    for (int i = 0; i < top; ++i) {
      const auto& rp = ranked_a[i];
      if (b_label[rp.pool_index] != rp.label) continue;
      items.push_back({rp.id, rp.pool_index, rp.label, rp.confidence, b_conf[rp.pool_index]});
    }
    if (static_cast<int>(items.size()) >= k || expansions >= max_expansions || k_prime >= n)
      break;
    k_prime = expand(k_prime, expansion_factor);
  }
  finalize(items, k);
  return {std::move(items)};
}

}  // namespace dualre
