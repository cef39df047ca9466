#include "dualre/encoder.hpp"

#include "dualre/rng.hpp"

namespace dualre {
namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double radius) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.next_real(-radius, radius);
}

// Mean over tokens of concat(word, pos_subj, pos_obj).
Eigen::VectorXd pooled_features(const EncoderParams& p, const std::vector<int>& ids,
                                const RelationMention& mention) {
  const auto& cfg = p.config;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(cfg.input_dim());
  const int n = static_cast<int>(ids.size());
  for (int i = 0; i < n; ++i) {
    mean.segment(0, cfg.word_dim) += p.word_embeddings.row(ids[i]);
    const int bs = position_bucket(span_distance(i, mention.subj_span), cfg.max_dist);
    const int bo = position_bucket(span_distance(i, mention.obj_span), cfg.max_dist);
    mean.segment(cfg.word_dim, cfg.pos_dim) += p.position_embeddings.row(bs);
    mean.segment(cfg.word_dim + cfg.pos_dim, cfg.pos_dim) += p.position_embeddings.row(bo);
  }
  mean /= static_cast<double>(n);
  return mean;
}

}  // namespace

int span_distance(int token_index, const std::pair<int, int>& span) {
  if (token_index < span.first) return token_index - span.first;
  if (token_index > span.second) return token_index - span.second;
  return 0;
}

int position_bucket(int distance, int max_dist) {
  if (distance < -max_dist) distance = -max_dist;
  if (distance > max_dist) distance = max_dist;
  return distance + max_dist;
}

std::vector<int> token_ids(const Vocabulary& vocab, const RelationMention& mention) {
  std::vector<int> ids;
  ids.reserve(mention.tokens.size());
  for (const auto& t : mention.tokens) ids.push_back(vocab.id_of(t));
  return ids;
}

EncoderParams EncoderParams::init(const EncoderConfig& config, int vocab_size,
                                  std::uint64_t seed) {
  if (config.word_dim < 1 || config.pos_dim < 1 || config.hidden_dim < 1 || config.max_dist < 1)
    throw std::invalid_argument("encoder config: all dimensions must be positive");
  EncoderParams p;
  p.config = config;
  p.word_embeddings.resize(vocab_size, config.word_dim);
  p.position_embeddings.resize(config.num_buckets(), config.pos_dim);
  p.projection.resize(config.hidden_dim, config.input_dim());
  p.bias = Eigen::VectorXd::Zero(config.hidden_dim);
  Rng rng(mix_seed(seed, /*stream=*/3));
  fill_uniform(p.word_embeddings, rng, 0.1);
  fill_uniform(p.position_embeddings, rng, 0.1);
  fill_uniform(p.projection, rng, 0.1);
  return p;
}

void EncoderParams::check_dims(int vocab_size) const {
  if (word_embeddings.rows() != vocab_size || word_embeddings.cols() != config.word_dim ||
      position_embeddings.rows() != config.num_buckets() ||
      position_embeddings.cols() != config.pos_dim ||
      projection.rows() != config.hidden_dim || projection.cols() != config.input_dim() ||
      bias.size() != config.hidden_dim)
    throw std::invalid_argument("encoder params: dimension mismatch with config/vocabulary");
}

EncoderGrad EncoderGrad::zeros_like(const EncoderParams& p) {
  EncoderGrad g;
  g.word_embeddings = Eigen::MatrixXd::Zero(p.word_embeddings.rows(), p.word_embeddings.cols());
  g.position_embeddings =
      Eigen::MatrixXd::Zero(p.position_embeddings.rows(), p.position_embeddings.cols());
  g.projection = Eigen::MatrixXd::Zero(p.projection.rows(), p.projection.cols());
  g.bias = Eigen::VectorXd::Zero(p.bias.size());
  return g;
}

void EncoderGrad::add_scaled(const EncoderGrad& other, double scale) {
  word_embeddings += scale * other.word_embeddings;
  position_embeddings += scale * other.position_embeddings;
  projection += scale * other.projection;
  bias += scale * other.bias;
}

bool EncoderGrad::finite() const {
  return word_embeddings.allFinite() && position_embeddings.allFinite() &&
         projection.allFinite() && bias.allFinite();
}

Eigen::VectorXd encode(const EncoderParams& params, const Vocabulary& vocab,
                       const RelationMention& mention) {
  params.check_dims(vocab.size());
  const auto ids = token_ids(vocab, mention);
  const Eigen::VectorXd mean = pooled_features(params, ids, mention);
  return (params.projection * mean + params.bias).array().tanh();
}

void encode_backward(const EncoderParams& params, const Vocabulary& vocab,
                     const RelationMention& mention, const Eigen::VectorXd& upstream,
                     EncoderGrad& grad) {
  params.check_dims(vocab.size());
  if (upstream.size() != params.config.hidden_dim)
    throw std::invalid_argument("encode_backward: upstream gradient dimension mismatch");
  const auto& cfg = params.config;
  const auto ids = token_ids(vocab, mention);
  const Eigen::VectorXd mean = pooled_features(params, ids, mention);
  const Eigen::VectorXd z = (params.projection * mean + params.bias).array().tanh();

  // d tanh(a) = (1 - z^2)
  const Eigen::VectorXd g_pre = upstream.array() * (1.0 - z.array().square());
  grad.bias += g_pre;
  grad.projection += g_pre * mean.transpose();

  const Eigen::VectorXd g_mean = params.projection.transpose() * g_pre;
  const double inv_n = 1.0 / static_cast<double>(ids.size());
  const Eigen::RowVectorXd g_word = g_mean.segment(0, cfg.word_dim).transpose() * inv_n;
  const Eigen::RowVectorXd g_pos_s =
      g_mean.segment(cfg.word_dim, cfg.pos_dim).transpose() * inv_n;
  const Eigen::RowVectorXd g_pos_o =
      g_mean.segment(cfg.word_dim + cfg.pos_dim, cfg.pos_dim).transpose() * inv_n;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    grad.word_embeddings.row(ids[i]) += g_word;
    const int bs = position_bucket(span_distance(i, mention.subj_span), cfg.max_dist);
    const int bo = position_bucket(span_distance(i, mention.obj_span), cfg.max_dist);
    grad.position_embeddings.row(bs) += g_pos_s;
    grad.position_embeddings.row(bo) += g_pos_o;
  }
}

void sgd_apply(EncoderParams& params, const EncoderGrad& grad, double learning_rate) {
  if (!grad.finite()) throw std::invalid_argument("sgd: non-finite encoder gradient");
  params.word_embeddings -= learning_rate * grad.word_embeddings;
  params.position_embeddings -= learning_rate * grad.position_embeddings;
  params.projection -= learning_rate * grad.projection;
  params.bias -= learning_rate * grad.bias;
}

}  // namespace dualre
