#include "dualre/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dualre {
namespace {

constexpr const char* kMagic = "dualre-model v1";

void write_matrix(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  write_matrix(out, name, Eigen::MatrixXd(v));
}

class Reader {
 public:
  Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  }

  std::string line() {
    std::string s;
    if (!std::getline(in_, s))
      throw std::runtime_error("checkpoint '" + path_ + "': unexpected end of file");
    return s;
  }

  // "key value" line with a fixed key
  std::string field(const std::string& key) {
    const std::string s = line();
    if (s.rfind(key + ' ', 0) != 0)
      throw std::runtime_error("checkpoint '" + path_ + "': expected '" + key + "', got '" + s +
                               "'");
    return s.substr(key.size() + 1);
  }

  long long int_field(const std::string& key) {
    const std::string v = field(key);
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw std::runtime_error("checkpoint '" + path_ + "': bad integer for '" + key + "'");
    }
  }

  std::uint64_t u64_field(const std::string& key) {
    const std::string v = field(key);
    try {
      std::size_t used = 0;
      const std::uint64_t n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw std::runtime_error("checkpoint '" + path_ + "': bad integer for '" + key + "'");
    }
  }

  Eigen::MatrixXd matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    std::istringstream header(line());
    std::string tag, got_name;
    Eigen::Index got_rows = 0, got_cols = 0;
    header >> tag >> got_name >> got_rows >> got_cols;
    if (tag != "tensor" || got_name != name || got_rows != rows || got_cols != cols)
      throw std::runtime_error("checkpoint '" + path_ + "': tensor '" + name +
                               "' missing or has mismatched dimensions");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(line());
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> m(r, c)))
          throw std::runtime_error("checkpoint '" + path_ + "': short row in tensor '" + name +
                                   "'");
      }
    }
    return m;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

struct Header {
  EncoderConfig config;
  RelationSchema schema;
  Vocabulary vocab;
};

void write_header(std::ostream& out, const char* kind, const EncoderConfig& config,
                  const Vocabulary& vocab, const RelationSchema& schema) {
  out << kMagic << '\n';
  out << "kind " << kind << '\n';
  out << "word_dim " << config.word_dim << '\n';
  out << "pos_dim " << config.pos_dim << '\n';
  out << "hidden_dim " << config.hidden_dim << '\n';
  out << "max_dist " << config.max_dist << '\n';
  out << "vocab_hash " << vocab.hash() << '\n';
  out << "labels " << schema.size() << '\n';
  for (const auto& label : schema.labels) out << label << '\n';
  out << "no_relation_index " << schema.no_relation_index << '\n';
  out << "vocab " << vocab.size() << '\n';
  for (const auto& token : vocab.tokens()) out << token << '\n';
}

Header read_header(Reader& reader, const std::string& path, const char* kind) {
  if (reader.line() != kMagic)
    throw std::runtime_error("checkpoint '" + path + "': not a model checkpoint");
  const std::string got_kind = reader.field("kind");
  if (got_kind != kind)
    throw std::runtime_error("checkpoint '" + path + "': is a " + got_kind + " model, expected " +
                             kind);
  Header h;
  h.config.word_dim = static_cast<int>(reader.int_field("word_dim"));
  h.config.pos_dim = static_cast<int>(reader.int_field("pos_dim"));
  h.config.hidden_dim = static_cast<int>(reader.int_field("hidden_dim"));
  h.config.max_dist = static_cast<int>(reader.int_field("max_dist"));
  const std::uint64_t hash = reader.u64_field("vocab_hash");

  const long long num_labels = reader.int_field("labels");
  for (long long i = 0; i < num_labels; ++i) h.schema.labels.push_back(reader.line());
  h.schema.no_relation_index = static_cast<int>(reader.int_field("no_relation_index"));
  validate_schema(h.schema);

  const long long vocab_size = reader.int_field("vocab");
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (long long i = 0; i < vocab_size; ++i) tokens.push_back(reader.line());
  h.vocab = Vocabulary::from_tokens(std::move(tokens));
  if (h.vocab.hash() != hash)
    throw std::runtime_error("checkpoint '" + path + "': vocabulary hash mismatch");
  return h;
}

}  // namespace

void save_predictor(const PredictorModel& model, const Vocabulary& vocab,
                    const RelationSchema& schema, const std::string& path) {
  model.check_dims(vocab.size());
  if (model.num_labels() != schema.size())
    throw std::invalid_argument("save: model and schema label counts differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_header(out, "predictor", model.encoder.config, vocab, schema);
  write_matrix(out, "word_embeddings", model.encoder.word_embeddings);
  write_matrix(out, "position_embeddings", model.encoder.position_embeddings);
  write_matrix(out, "projection", model.encoder.projection);
  write_vector(out, "bias", model.encoder.bias);
  write_matrix(out, "softmax_weights", model.softmax_weights);
  write_vector(out, "softmax_bias", model.softmax_bias);
  out << "end\n";
  if (!out) throw std::runtime_error("write failed for checkpoint '" + path + "'");
}

PredictorCheckpoint load_predictor(const std::string& path) {
  Reader reader(path);
  Header h = read_header(reader, path, "predictor");
  PredictorCheckpoint cp;
  cp.schema = std::move(h.schema);
  cp.vocab = std::move(h.vocab);
  auto& m = cp.model;
  m.encoder.config = h.config;
  m.encoder.word_embeddings = reader.matrix("word_embeddings", cp.vocab.size(), h.config.word_dim);
  m.encoder.position_embeddings =
      reader.matrix("position_embeddings", h.config.num_buckets(), h.config.pos_dim);
  m.encoder.projection = reader.matrix("projection", h.config.hidden_dim, h.config.input_dim());
  m.encoder.bias = reader.matrix("bias", h.config.hidden_dim, 1);
  m.softmax_weights = reader.matrix("softmax_weights", cp.schema.size(), h.config.hidden_dim);
  m.softmax_bias = reader.matrix("softmax_bias", cp.schema.size(), 1);
  if (reader.line() != "end")
    throw std::runtime_error("checkpoint '" + path + "': missing end marker");
  m.check_dims(cp.vocab.size());
  return cp;
}

void save_retriever(const RetrieverModel& model, const Vocabulary& vocab,
                    const RelationSchema& schema, const std::string& path) {
  model.check_dims(vocab.size());
  if (model.num_labels() != schema.size())
    throw std::invalid_argument("save: model and schema label counts differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_header(out, "retriever", model.encoder.config, vocab, schema);
  write_matrix(out, "word_embeddings", model.encoder.word_embeddings);
  write_matrix(out, "position_embeddings", model.encoder.position_embeddings);
  write_matrix(out, "projection", model.encoder.projection);
  write_vector(out, "bias", model.encoder.bias);
  write_matrix(out, "relation_embeddings", model.relation_embeddings);
  out << "end\n";
  if (!out) throw std::runtime_error("write failed for checkpoint '" + path + "'");
}

RetrieverCheckpoint load_retriever(const std::string& path) {
  Reader reader(path);
  Header h = read_header(reader, path, "retriever");
  RetrieverCheckpoint cp;
  cp.schema = std::move(h.schema);
  cp.vocab = std::move(h.vocab);
  auto& m = cp.model;
  m.encoder.config = h.config;
  m.encoder.word_embeddings = reader.matrix("word_embeddings", cp.vocab.size(), h.config.word_dim);
  m.encoder.position_embeddings =
      reader.matrix("position_embeddings", h.config.num_buckets(), h.config.pos_dim);
  m.encoder.projection = reader.matrix("projection", h.config.hidden_dim, h.config.input_dim());
  m.encoder.bias = reader.matrix("bias", h.config.hidden_dim, 1);
  m.relation_embeddings =
      reader.matrix("relation_embeddings", cp.schema.size(), h.config.hidden_dim);
  if (reader.line() != "end")
    throw std::runtime_error("checkpoint '" + path + "': missing end marker");
  m.check_dims(cp.vocab.size());
  return cp;
}

}  // namespace dualre
