#include "dualre/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "dualre/evaluation.hpp"
#include "dualre/rng.hpp"

namespace dualre {
namespace {

// Numerically stable softmax of a logit vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp();
  return p / p.sum();
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

}  // namespace

PredictorModel PredictorModel::init(const EncoderConfig& config, int vocab_size,
                                    int num_labels, std::uint64_t seed) {
  if (num_labels < 2) throw std::invalid_argument("predictor: need at least 2 labels");
  PredictorModel m;
  m.encoder = EncoderParams::init(config, vocab_size, seed);
  m.softmax_weights.resize(num_labels, config.hidden_dim);
  m.softmax_bias = Eigen::VectorXd::Zero(num_labels);
  Rng rng(mix_seed(seed, /*stream=*/4));
  for (Eigen::Index r = 0; r < m.softmax_weights.rows(); ++r)
    for (Eigen::Index c = 0; c < m.softmax_weights.cols(); ++c)
      m.softmax_weights(r, c) = rng.next_real(-0.1, 0.1);
  return m;
}

void PredictorModel::check_dims(int vocab_size) const {
  encoder.check_dims(vocab_size);
  if (softmax_weights.cols() != encoder.config.hidden_dim ||
      softmax_bias.size() != softmax_weights.rows() || softmax_weights.rows() < 2)
    throw std::invalid_argument("predictor: softmax dimensions inconsistent");
}

PredictorGrad PredictorGrad::zeros_like(const PredictorModel& model) {
  PredictorGrad g;
  g.encoder = EncoderGrad::zeros_like(model.encoder);
  g.softmax_weights =
      Eigen::MatrixXd::Zero(model.softmax_weights.rows(), model.softmax_weights.cols());
  g.softmax_bias = Eigen::VectorXd::Zero(model.softmax_bias.size());
  return g;
}

bool PredictorGrad::finite() const {
  return encoder.finite() && softmax_weights.allFinite() && softmax_bias.allFinite();
}

Eigen::VectorXd predict_proba(const PredictorModel& model, const Vocabulary& vocab,
                              const RelationMention& mention) {
  const Eigen::VectorXd z = encode(model.encoder, vocab, mention);
  return softmax(model.softmax_weights * z + model.softmax_bias);
}

double nll_loss_and_grad(const PredictorModel& model, const Vocabulary& vocab,
                         const std::vector<WeightedExample>& batch, PredictorGrad& grad) {
  if (batch.empty()) throw std::invalid_argument("nll: empty batch");
  double total_weight = 0.0;
  for (const auto& we : batch) {
    if (!std::isfinite(we.weight) || we.weight < 0.0)
      throw std::invalid_argument("nll: weights must be finite and non-negative");
    total_weight += we.weight;
  }
  if (total_weight <= 0.0) throw std::invalid_argument("nll: all-zero total weight");

  grad = PredictorGrad::zeros_like(model);
  double loss = 0.0;
  for (const auto& we : batch) {
    if (we.weight == 0.0) continue;
    const auto& ex = *we.example;
    if (ex.label < 0 || ex.label >= model.num_labels())
      throw std::invalid_argument("nll: label out of range for '" + ex.mention.id + "'");
    const double scale = we.weight / total_weight;
    const Eigen::VectorXd z = encode(model.encoder, vocab, ex.mention);
    const Eigen::VectorXd probs = softmax(model.softmax_weights * z + model.softmax_bias);
    loss -= scale * std::log(probs(ex.label));

    // d loss / d logits = scale * (probs - one_hot(y))
    Eigen::VectorXd g_logits = scale * probs;
    g_logits(ex.label) -= scale;
    grad.softmax_bias += g_logits;
    grad.softmax_weights += g_logits * z.transpose();
    const Eigen::VectorXd g_z = model.softmax_weights.transpose() * g_logits;
    encode_backward(model.encoder, vocab, ex.mention, g_z, grad.encoder);
  }
  return loss;
}

void sgd_step(PredictorModel& model, const PredictorGrad& grad, double learning_rate) {
  if (!grad.finite() || !std::isfinite(learning_rate))
    throw std::invalid_argument("sgd: non-finite predictor gradient");
  sgd_apply(model.encoder, grad.encoder, learning_rate);
  model.softmax_weights -= learning_rate * grad.softmax_weights;
  model.softmax_bias -= learning_rate * grad.softmax_bias;
}

std::vector<RankedPrediction> rank_unlabeled_by_confidence(
    const PredictorModel& model, const Vocabulary& vocab,
    const std::vector<RelationMention>& pool) {
  std::vector<RankedPrediction> ranked;
  ranked.reserve(pool.size());
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    const Eigen::VectorXd probs = predict_proba(model, vocab, pool[i]);
    RankedPrediction rp;
    rp.id = pool[i].id;
    rp.pool_index = i;
    rp.label = argmax_lowest(probs);
    rp.confidence = probs(rp.label);
    ranked.push_back(std::move(rp));
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedPrediction& a, const RankedPrediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.id < b.id;
  });
  return ranked;
}

std::vector<int> predict_labels(const PredictorModel& model, const Vocabulary& vocab,
                                const std::vector<const RelationMention*>& mentions) {
  std::vector<int> labels;
  labels.reserve(mentions.size());
  for (const auto* m : mentions)
    labels.push_back(argmax_lowest(predict_proba(model, vocab, *m)));
  return labels;
}

namespace {

double dev_f1(const PredictorModel& model, const Vocabulary& vocab,
              const std::vector<LabeledExample>& dev, const RelationSchema& schema) {
  std::vector<const RelationMention*> mentions;
  std::vector<int> gold;
  mentions.reserve(dev.size());
  for (const auto& ex : dev) {
    mentions.push_back(&ex.mention);
    gold.push_back(ex.label);
  }
  return score(gold, predict_labels(model, vocab, mentions), schema).f1;
}

}  // namespace

void fit_predictor(PredictorModel& model, const Vocabulary& vocab,
                   const std::vector<WeightedExample>& train,
                   const std::vector<LabeledExample>& dev, const RelationSchema& schema,
                   const FitOptions& options) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (options.batch_size < 1 || options.max_epochs < 0 || options.learning_rate <= 0.0)
    throw std::invalid_argument("fit: invalid options");
  model.check_dims(vocab.size());

  Rng rng(mix_seed(options.seed, /*stream=*/5));
  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  PredictorModel best = model;
  double best_f1 = dev.empty() ? 0.0 : dev_f1(model, vocab, dev, schema);
  int stale = 0;
  PredictorGrad grad;

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
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
      if (batch_weight <= 0.0) continue;  // batch of weight-0 examples: nothing to learn
      nll_loss_and_grad(model, vocab, batch, grad);
      sgd_step(model, grad, options.learning_rate);
    }
    if (!dev.empty()) {
      const double f1 = dev_f1(model, vocab, dev, schema);
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
