#include "dualre/retriever.hpp"

#include <algorithm>
#include <cmath>

#include "dualre/evaluation.hpp"
#include "dualre/rng.hpp"

namespace dualre {
namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

}  // namespace

RetrieverModel RetrieverModel::init(const EncoderConfig& config, int vocab_size,
                                    int num_labels, std::uint64_t seed) {
  if (num_labels < 2) throw std::invalid_argument("retriever: need at least 2 labels");
  RetrieverModel m;
  m.encoder = EncoderParams::init(config, vocab_size, seed);
  m.relation_embeddings.resize(num_labels, config.hidden_dim);
  Rng rng(mix_seed(seed, /*stream=*/6));
  for (Eigen::Index r = 0; r < m.relation_embeddings.rows(); ++r)
    for (Eigen::Index c = 0; c < m.relation_embeddings.cols(); ++c)
      m.relation_embeddings(r, c) = rng.next_real(-0.1, 0.1);
  return m;
}

void RetrieverModel::check_dims(int vocab_size) const {
  encoder.check_dims(vocab_size);
  if (relation_embeddings.cols() != encoder.config.hidden_dim || relation_embeddings.rows() < 2)
    throw std::invalid_argument("retriever: relation embedding dimensions inconsistent");
}

RetrieverGrad RetrieverGrad::zeros_like(const RetrieverModel& model) {
  RetrieverGrad g;
  g.encoder = EncoderGrad::zeros_like(model.encoder);
  g.relation_embeddings =
      Eigen::MatrixXd::Zero(model.relation_embeddings.rows(), model.relation_embeddings.cols());
  return g;
}

bool RetrieverGrad::finite() const {
  return encoder.finite() && relation_embeddings.allFinite();
}

double relevance(const RetrieverModel& model, const Vocabulary& vocab,
                 const RelationMention& mention, int label) {
  if (label < 0 || label >= model.num_labels())
    throw std::invalid_argument("relevance: label out of range");
  const Eigen::VectorXd z = encode(model.encoder, vocab, mention);
  return sigmoid(model.relation_embeddings.row(label).dot(z));
}

Eigen::MatrixXd relevance_matrix(const RetrieverModel& model, const Vocabulary& vocab,
                                 const std::vector<RelationMention>& pool) {
  model.check_dims(vocab.size());
  Eigen::MatrixXd z(pool.size(), model.encoder.config.hidden_dim);
  for (std::size_t i = 0; i < pool.size(); ++i)
    z.row(i) = encode(model.encoder, vocab, pool[i]).transpose();
  Eigen::MatrixXd scores = z * model.relation_embeddings.transpose();
  return scores.unaryExpr([](double t) { return sigmoid(t); });
}

double pointwise_loss_and_grad(const RetrieverModel& model, const Vocabulary& vocab,
                               const std::vector<WeightedExample>& batch,
                               int negatives_per_positive, Rng* rng, RetrieverGrad& grad) {
  const int num_labels = model.num_labels();
  if (num_labels < 2)
    throw std::invalid_argument("pointwise: schema has no negative labels");
  if (batch.empty()) throw std::invalid_argument("pointwise: empty batch");
  if (negatives_per_positive != kAllNegatives && negatives_per_positive < 1)
    throw std::invalid_argument("pointwise: negatives_per_positive must be positive or ALL");
  const bool sample = negatives_per_positive != kAllNegatives &&
                      negatives_per_positive < num_labels - 1;
  if (sample && rng == nullptr)
    throw std::invalid_argument("pointwise: negative sampling needs an rng");

  double total_weight = 0.0;
  for (const auto& we : batch) {
    if (!std::isfinite(we.weight) || we.weight < 0.0)
      throw std::invalid_argument("pointwise: weights must be finite and non-negative");
    total_weight += we.weight;
  }
  if (total_weight <= 0.0) throw std::invalid_argument("pointwise: all-zero total weight");

  grad = RetrieverGrad::zeros_like(model);
  double loss = 0.0;
  std::vector<int> negatives;
  for (const auto& we : batch) {
    if (we.weight == 0.0) continue;
    const auto& ex = *we.example;
    if (ex.label < 0 || ex.label >= num_labels)
      throw std::invalid_argument("pointwise: label out of range for '" + ex.mention.id + "'");
    const double scale = we.weight / total_weight;
    const Eigen::VectorXd z = encode(model.encoder, vocab, ex.mention);

    negatives.clear();
    if (!sample) {
      for (int y = 0; y < num_labels; ++y)
        if (y != ex.label) negatives.push_back(y);
    } else {
      // Without replacement: draw from the shrinking set of labels != y.
      std::vector<int> candidates;
      candidates.reserve(num_labels - 1);
      for (int y = 0; y < num_labels; ++y)
        if (y != ex.label) candidates.push_back(y);
      for (int n = 0; n < negatives_per_positive; ++n) {
        const std::size_t pick = rng->next_below(candidates.size());
        negatives.push_back(candidates[pick]);
        candidates[pick] = candidates.back();
        candidates.pop_back();
      }
    }

    Eigen::VectorXd g_z = Eigen::VectorXd::Zero(z.size());
    const double s_pos = model.relation_embeddings.row(ex.label).dot(z);
    loss -= scale * std::log(sigmoid(s_pos));
    const double g_pos = scale * (sigmoid(s_pos) - 1.0);
    grad.relation_embeddings.row(ex.label) += g_pos * z.transpose();
    g_z += g_pos * model.relation_embeddings.row(ex.label).transpose();

    for (int y : negatives) {
      const double s_neg = model.relation_embeddings.row(y).dot(z);
      loss -= scale * std::log(1.0 - sigmoid(s_neg));
      const double g_neg = scale * sigmoid(s_neg);
      grad.relation_embeddings.row(y) += g_neg * z.transpose();
      g_z += g_neg * model.relation_embeddings.row(y).transpose();
    }
    encode_backward(model.encoder, vocab, ex.mention, g_z, grad.encoder);
  }
  return loss;
}

double pairwise_loss_and_grad(const RetrieverModel& model, const Vocabulary& vocab,
                              const std::vector<RankPair>& pairs, RetrieverGrad& grad) {
  if (pairs.empty()) throw std::invalid_argument("pairwise: empty pair set");
  double total_weight = 0.0;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.weight) || p.weight < 0.0)
      throw std::invalid_argument("pairwise: weights must be finite and non-negative");
    if (!std::isfinite(p.order_score) || p.order_score <= 0.0)
      throw std::invalid_argument("pairwise: order score must be positive");
    total_weight += p.weight;
  }
  if (total_weight <= 0.0) throw std::invalid_argument("pairwise: all-zero total weight");

  grad = RetrieverGrad::zeros_like(model);
  double loss = 0.0;
  for (const auto& p : pairs) {
    if (p.weight == 0.0) continue;
    if (p.label < 0 || p.label >= model.num_labels())
      throw std::invalid_argument("pairwise: label out of range");
    const double scale = p.weight / total_weight;
    const Eigen::VectorXd z_pos = encode(model.encoder, vocab, *p.positive);
    const Eigen::VectorXd z_par = encode(model.encoder, vocab, *p.partner);
    const Eigen::VectorXd y = model.relation_embeddings.row(p.label).transpose();
    const double t = y.dot(z_pos) - y.dot(z_par);
    loss -= scale * p.order_score * std::log(sigmoid(t));

    const double g_t = -scale * p.order_score * (1.0 - sigmoid(t));
    grad.relation_embeddings.row(p.label) += g_t * (z_pos - z_par).transpose();
    encode_backward(model.encoder, vocab, *p.positive, g_t * y, grad.encoder);
    encode_backward(model.encoder, vocab, *p.partner, -g_t * y, grad.encoder);
  }
  return loss;
}

void sgd_step(RetrieverModel& model, const RetrieverGrad& grad, double learning_rate) {
  if (!grad.finite() || !std::isfinite(learning_rate))
    throw std::invalid_argument("sgd: non-finite retriever gradient");
  sgd_apply(model.encoder, grad.encoder, learning_rate);
  model.relation_embeddings -= learning_rate * grad.relation_embeddings;
}

RetrievalResult retrieve_per_relation(const Eigen::MatrixXd& scores,
                                      const std::vector<RelationMention>& pool,
                                      const std::vector<int>& quotas) {
  if (scores.rows() != static_cast<Eigen::Index>(pool.size()))
    throw std::invalid_argument("retrieve: score matrix does not match the pool");
  if (quotas.size() != static_cast<std::size_t>(scores.cols()))
    throw std::invalid_argument("retrieve: one quota per label required");

  RetrievalResult result;
  result.per_label.resize(quotas.size());
  const int n = static_cast<int>(pool.size());
  std::vector<int> order(n);
  for (std::size_t y = 0; y < quotas.size(); ++y) {
    if (quotas[y] < 0) throw std::invalid_argument("retrieve: negative quota");
    if (quotas[y] == 0) continue;
    if (quotas[y] > n) result.truncated = true;
    const int take = std::min(quotas[y], n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores(a, y) != scores(b, y)) return scores(a, y) > scores(b, y);
      return pool[a].id < pool[b].id;
    });
    auto& list = result.per_label[y];
    list.reserve(take);
    for (int i = 0; i < take; ++i)
      list.push_back({pool[order[i]].id, order[i], scores(order[i], y)});
  }
  return result;
}

RetrievalResult retrieve_per_relation(const RetrieverModel& model, const Vocabulary& vocab,
                                      const std::vector<RelationMention>& pool,
                                      const std::vector<int>& quotas) {
  return retrieve_per_relation(relevance_matrix(model, vocab, pool), pool, quotas);
}

namespace {

double retriever_dev_f1(const RetrieverModel& model, const Vocabulary& vocab,
                        const std::vector<LabeledExample>& dev, const RelationSchema& schema) {
  std::vector<int> gold, pred;
  gold.reserve(dev.size());
  pred.reserve(dev.size());
  for (const auto& ex : dev) {
    const Eigen::VectorXd z = encode(model.encoder, vocab, ex.mention);
    pred.push_back(argmax_lowest(model.relation_embeddings * z));
    gold.push_back(ex.label);
  }
  return score(gold, pred, schema).f1;
}

// 2 negative partners + 1 positive partner per instance, drawn uniformly
// and seeded; pairs inherit the instance's promotion weight.
std::vector<RankPair> sample_pairs(const std::vector<WeightedExample>& train, int num_labels,
                                   Rng& rng) {
  std::vector<std::vector<int>> by_label(num_labels);
  std::vector<int> pos_in_label(train.size());
  for (int i = 0; i < static_cast<int>(train.size()); ++i) {
    const int y = train[i].example->label;
    pos_in_label[i] = static_cast<int>(by_label[y].size());
    by_label[y].push_back(i);
  }
  std::vector<std::vector<int>> others(num_labels);
  for (int y = 0; y < num_labels; ++y)
    for (int i = 0; i < static_cast<int>(train.size()); ++i)
      if (train[i].example->label != y) others[y].push_back(i);

  std::vector<RankPair> pairs;
  pairs.reserve(train.size() * 3);
  for (int i = 0; i < static_cast<int>(train.size()); ++i) {
    const int y = train[i].example->label;
    for (int n = 0; n < 2 && !others[y].empty(); ++n) {
      const int j = others[y][rng.next_below(others[y].size())];
      pairs.push_back({&train[i].example->mention, &train[j].example->mention, y, 1.0,
                       train[i].weight});
    }
    const auto& same = by_label[y];
    if (same.size() >= 2) {
      std::size_t pick = rng.next_below(same.size() - 1);
      if (pick >= static_cast<std::size_t>(pos_in_label[i])) ++pick;
      pairs.push_back({&train[i].example->mention, &train[same[pick]].example->mention, y, 0.5,
                       train[i].weight});
    }
  }
  return pairs;
}

}  // namespace

void fit_retriever(RetrieverModel& model, const Vocabulary& vocab,
                   const std::vector<WeightedExample>& train,
                   const std::vector<LabeledExample>& dev, const RelationSchema& schema,
                   const RetrieverFitOptions& options) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (options.batch_size < 1 || options.max_epochs < 0 || options.learning_rate <= 0.0)
    throw std::invalid_argument("fit: invalid options");
  model.check_dims(vocab.size());

  Rng rng(mix_seed(options.seed, /*stream=*/7));
  RetrieverModel best = model;
  double best_f1 = dev.empty() ? 0.0 : retriever_dev_f1(model, vocab, dev, schema);
  int stale = 0;
  RetrieverGrad grad;

  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    if (options.pairwise) {
      auto pairs = sample_pairs(train, model.num_labels(), rng);
      if (pairs.empty()) return;  // degenerate single-example corpus
      rng.shuffle(pairs);
      for (std::size_t start = 0; start < pairs.size(); start += options.batch_size) {
        const std::size_t end = std::min(pairs.size(), start + options.batch_size);
        std::vector<RankPair> batch(pairs.begin() + start, pairs.begin() + end);
        double batch_weight = 0.0;
        for (const auto& p : batch) batch_weight += p.weight;
        if (batch_weight <= 0.0) continue;
        pairwise_loss_and_grad(model, vocab, batch, grad);
        sgd_step(model, grad, options.learning_rate);
      }
    } else {
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
        const std::size_t end = std::min(order.size(), start + options.batch_size);
        std::vector<WeightedExample> batch;
        batch.reserve(end - start);
        double batch_weight = 0.0;
        for (std::size_t i = start; i < end; ++i) {
          batch.push_back(train[order[i]]);
          batch_weight += train[order[i]].weight;
        }
        if (batch_weight <= 0.0) continue;
        pointwise_loss_and_grad(model, vocab, batch, options.negatives_per_positive, &rng, grad);
        sgd_step(model, grad, options.learning_rate);
      }
    }
    if (!dev.empty()) {
      const double f1 = retriever_dev_f1(model, vocab, dev, schema);
      if (f1 > best_f1) {
        best_f1 = f1;
        best = model;
        stale = 0;
      } else if (++stale >= options.patience) {
        model = best;
        return;
      }
    }
  }
  if (!dev.empty()) model = best;
}

}  // namespace dualre
