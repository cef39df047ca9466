#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "dualre/types.hpp"
#include "dualre/vocab.hpp"

namespace dualre {

struct EncoderConfig {
  int word_dim = 50;
  int pos_dim = 10;
  int hidden_dim = 64;
  int max_dist = 30;  // signed span distances are clipped to [-max_dist, max_dist]

  int num_buckets() const { return 2 * max_dist + 1; }
  int input_dim() const { return word_dim + 2 * pos_dim; }
};

// Mean-pooled word + dual-position embeddings through one tanh projection.
// z = tanh(P * mean_i concat(word[tok_i], pos[bucket_subj(i)], pos[bucket_obj(i)]) + b)
struct EncoderParams {
  EncoderConfig config;
  Eigen::MatrixXd word_embeddings;      // vocab_size x word_dim
  Eigen::MatrixXd position_embeddings;  // num_buckets x pos_dim, shared by both spans
  Eigen::MatrixXd projection;           // hidden_dim x input_dim
  Eigen::VectorXd bias;                 // hidden_dim

  static EncoderParams init(const EncoderConfig& config, int vocab_size, std::uint64_t seed);
  void check_dims(int vocab_size) const;
};

struct EncoderGrad {
  Eigen::MatrixXd word_embeddings;
  Eigen::MatrixXd position_embeddings;
  Eigen::MatrixXd projection;
  Eigen::VectorXd bias;

  static EncoderGrad zeros_like(const EncoderParams& params);
  void add_scaled(const EncoderGrad& other, double scale);
  bool finite() const;
};

// Signed distance of token i to an inclusive span: 0 inside the span,
// negative before it, positive after it.
int span_distance(int token_index, const std::pair<int, int>& span);

// Distance clipped to [-max_dist, max_dist], then offset to a row index.
int position_bucket(int distance, int max_dist);

// Token-id view of a mention under a vocabulary (OOV-mapped).
std::vector<int> token_ids(const Vocabulary& vocab, const RelationMention& mention);

Eigen::VectorXd encode(const EncoderParams& params, const Vocabulary& vocab,
                       const RelationMention& mention);

// Gradient of dot(z, upstream) with respect to every parameter block.
// Untouched embedding rows stay exactly zero. The gradient is accumulated
// into `grad` so one structure can serve a whole batch.
void encode_backward(const EncoderParams& params, const Vocabulary& vocab,
                     const RelationMention& mention, const Eigen::VectorXd& upstream,
                     EncoderGrad& grad);

void sgd_apply(EncoderParams& params, const EncoderGrad& grad, double learning_rate);

}  // namespace dualre
