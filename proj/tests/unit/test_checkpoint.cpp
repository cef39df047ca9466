#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualre/checkpoint.hpp"

using namespace dualre;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

RelationMention make_mention() {
  RelationMention m;
  m.id = "probe";
  m.tokens = {"alpha", "beta", "unknown", "gamma"};
  m.subj_span = {0, 0};
  m.obj_span = {3, 3};
  return m;
}

struct Fixture {
  RelationSchema schema = RelationSchema::from_observed({"r1", "r2"});
  Vocabulary vocab = Vocabulary::from_tokens({"<oov>", "alpha", "beta", "gamma"});
  EncoderConfig config;

  Fixture() {
    config.word_dim = 3;
    config.pos_dim = 2;
    config.hidden_dim = 4;
    config.max_dist = 2;
  }
};

// Rewrites the first line starting with `prefix` via `make_line(old)`.
void tamper(const std::string& path, const std::string& prefix,
            const std::string& replacement) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  bool done = false;
  while (std::getline(in, line)) {
    if (!done && line.rfind(prefix, 0) == 0) {
      line = replacement;
      done = true;
    }
    lines.push_back(line);
  }
  REQUIRE(done);
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("a predictor checkpoint round-trips bitwise") {
  const Fixture f;
  const auto model = PredictorModel::init(f.config, f.vocab.size(), f.schema.size(), 31);
  const auto path = temp_path("dualre_predictor.ckpt");
  save_predictor(model, f.vocab, f.schema, path);

  const auto loaded = load_predictor(path);
  CHECK(loaded.schema.labels == f.schema.labels);
  CHECK(loaded.schema.no_relation_index == f.schema.no_relation_index);
  CHECK(loaded.vocab.tokens() == f.vocab.tokens());
  CHECK(loaded.vocab.hash() == f.vocab.hash());
  CHECK(loaded.model.encoder.word_embeddings == model.encoder.word_embeddings);
  CHECK(loaded.model.encoder.position_embeddings == model.encoder.position_embeddings);
  CHECK(loaded.model.encoder.projection == model.encoder.projection);
  CHECK(loaded.model.encoder.bias == model.encoder.bias);
  CHECK(loaded.model.softmax_weights == model.softmax_weights);
  CHECK(loaded.model.softmax_bias == model.softmax_bias);

  const auto mention = make_mention();
  const Eigen::VectorXd before = predict_proba(model, f.vocab, mention);
  const Eigen::VectorXd after = predict_proba(loaded.model, loaded.vocab, mention);
  CHECK(before == after);
}

TEST_CASE("a retriever checkpoint round-trips bitwise") {
  const Fixture f;
  const auto model = RetrieverModel::init(f.config, f.vocab.size(), f.schema.size(), 32);
  const auto path = temp_path("dualre_retriever.ckpt");
  save_retriever(model, f.vocab, f.schema, path);

  const auto loaded = load_retriever(path);
  CHECK(loaded.schema.labels == f.schema.labels);
  CHECK(loaded.vocab.tokens() == f.vocab.tokens());
  CHECK(loaded.model.encoder.word_embeddings == model.encoder.word_embeddings);
  CHECK(loaded.model.encoder.position_embeddings == model.encoder.position_embeddings);
  CHECK(loaded.model.encoder.projection == model.encoder.projection);
  CHECK(loaded.model.encoder.bias == model.encoder.bias);
  CHECK(loaded.model.relation_embeddings == model.relation_embeddings);
}

TEST_CASE("loading the wrong model kind is refused") {
  const Fixture f;
  const auto predictor = PredictorModel::init(f.config, f.vocab.size(), f.schema.size(), 31);
  const auto retriever = RetrieverModel::init(f.config, f.vocab.size(), f.schema.size(), 32);
  const auto p_path = temp_path("dualre_kind_p.ckpt");
  const auto r_path = temp_path("dualre_kind_r.ckpt");
  save_predictor(predictor, f.vocab, f.schema, p_path);
  save_retriever(retriever, f.vocab, f.schema, r_path);

  CHECK_THROWS_WITH_AS(load_retriever(p_path),
                       doctest::Contains("is a predictor model, expected retriever"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(load_predictor(r_path),
                       doctest::Contains("is a retriever model, expected predictor"),
                       std::runtime_error);
}

TEST_CASE("tampered checkpoints fail their header validation") {
  const Fixture f;
  const auto model = PredictorModel::init(f.config, f.vocab.size(), f.schema.size(), 31);

  const auto path = temp_path("dualre_tamper.ckpt");
  auto fresh = [&]() { save_predictor(model, f.vocab, f.schema, path); };

  fresh();
  tamper(path, "dualre-model", "other-format v9");
  CHECK_THROWS_WITH_AS(load_predictor(path), doctest::Contains("not a model checkpoint"),
                       std::runtime_error);

  fresh();
  tamper(path, "vocab_hash", "vocab_hash 12345");
  CHECK_THROWS_WITH_AS(load_predictor(path), doctest::Contains("vocabulary hash mismatch"),
                       std::runtime_error);

  fresh();
  tamper(path, "word_dim", "word_dim 7");
  CHECK_THROWS_WITH_AS(load_predictor(path), doctest::Contains("mismatched dimensions"),
                       std::runtime_error);

  fresh();
  tamper(path, "word_dim", "word_dim seven");
  CHECK_THROWS_WITH_AS(load_predictor(path), doctest::Contains("bad integer"),
                       std::runtime_error);

  // Truncation: drop everything after the header's vocab list.
  fresh();
  {
    std::ifstream in(path);
    std::stringstream kept;
    std::string line;
    for (int i = 0; i < 10 && std::getline(in, line); ++i) kept << line << '\n';
    in.close();
    std::ofstream out(path, std::ios::trunc);
    out << kept.str();
  }
  CHECK_THROWS_AS(load_predictor(path), std::runtime_error);

  CHECK_THROWS_WITH_AS(load_predictor(temp_path("dualre_nonexistent.ckpt")),
                       doctest::Contains("cannot open checkpoint"), std::runtime_error);
}

TEST_CASE("saving validates the model against the schema") {
  const Fixture f;
  const auto model = PredictorModel::init(f.config, f.vocab.size(), f.schema.size(), 31);
  const auto wide = RelationSchema::from_observed({"r1", "r2", "r3"});
  CHECK_THROWS_AS(save_predictor(model, f.vocab, wide, temp_path("dualre_bad.ckpt")),
                  std::invalid_argument);
}
