#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualre/split.hpp"
#include "dualre/synthetic.hpp"
#include "dualre/trainer.hpp"

using namespace dualre;

namespace {

struct Fixture {
  RelationSchema schema;
  CorpusState corpus;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  SealedTruth sealed;
};

Fixture make_fixture(double labeled_fraction = 0.3, double unlabeled_fraction = 0.4,
                     double dev_fraction = 0.2, std::uint64_t seed = 21) {
  SyntheticConfig synth;
  synth.num_relations = 3;
  synth.vocab_size = 25;
  synth.examples_per_relation = 30;
  synth.negative_fraction = 0.25;
  synth.seed = seed;
  auto [schema, data] = generate_synthetic(synth);

  SplitSpec spec;
  spec.labeled_fraction = labeled_fraction;
  spec.unlabeled_fraction = unlabeled_fraction;
  spec.dev_fraction = dev_fraction;
  spec.seed = seed + 1;
  auto split = stratified_split(data, schema, spec);

  Fixture f;
  f.schema = schema;
  f.corpus.schema = schema;
  f.corpus.labeled = std::move(split.labeled);
  f.corpus.unlabeled = std::move(split.unlabeled);
  f.dev = std::move(split.dev);
  f.test = std::move(split.test);
  f.sealed = std::move(split.sealed_truth);
  return f;
}

TrainConfig small_config() {
  TrainConfig config;
  config.encoder.word_dim = 8;
  config.encoder.pos_dim = 2;
  config.encoder.hidden_dim = 8;
  config.encoder.max_dist = 4;
  config.learning_rate = 0.5;
  config.batch_size = 8;
  config.max_epochs = 6;
  config.patience = 3;
  config.k = 5;
  config.iterations_cap = 2;
  config.seed = 77;
  return config;
}

bool same_report(const ScoreReport& a, const ScoreReport& b) {
  return a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 &&
         a.predicted_positive == b.predicted_positive && a.gold_positive == b.gold_positive &&
         a.correct_positive == b.correct_positive;
}

bool same_records(const std::vector<IterationRecord>& a, const std::vector<IterationRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].iteration != b[i].iteration || a[i].n_pseudo != b[i].n_pseudo) return false;
    if (a[i].sel_precision != b[i].sel_precision) return false;
    if (!same_report(a[i].dev, b[i].dev) || !same_report(a[i].test, b[i].test)) return false;
    if (a[i].promoted.size() != b[i].promoted.size()) return false;
    for (std::size_t j = 0; j < a[i].promoted.size(); ++j) {
      const auto& x = a[i].promoted[j];
      const auto& y = b[i].promoted[j];
      if (x.id != y.id || x.label != y.label || x.p != y.p || x.q != y.q ||
          x.weight_p != y.weight_p || x.weight_q != y.weight_q)
        return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("method names parse and render consistently") {
  for (const auto* name :
       {"dualre", "dualre-pairwise", "self", "ensemble", "gold", "supervised"})
    CHECK(method_name(parse_method(name)) == name);
  CHECK_THROWS_AS(parse_method("mystery"), std::invalid_argument);
}

TEST_CASE("iterations_cap zero returns just the pretrained state") {
  const auto f = make_fixture();
  auto config = small_config();
  config.iterations_cap = 0;

  const auto result = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, config);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].iteration == 0);
  CHECK(result.records[0].n_pseudo == 0);
  CHECK(result.records[0].promoted.empty());
  CHECK(result.records[0].sel_precision == -1.0);
  CHECK(result.retriever.has_value());
  CHECK_FALSE(result.predictor_b.has_value());
}

TEST_CASE("self-training consumes the pool in chunks of k") {
  auto f = make_fixture();
  REQUIRE(f.corpus.unlabeled.size() >= 20);
  f.corpus.unlabeled.resize(20);  // shrink the pool to a known size
  auto config = small_config();
  config.k = 7;
  config.iterations_cap = 10;
  config.max_epochs = 2;

  // No dev set: convergence checks are skipped, the pool drains fully.
  const auto result = train(Method::kSelf, f.corpus, {}, f.test, nullptr, config);
  REQUIRE(result.records.size() == 4);
  CHECK(result.records[1].n_pseudo == 7);
  CHECK(result.records[2].n_pseudo == 14);
  CHECK(result.records[3].n_pseudo == 20);
  CHECK(result.records[3].promoted.size() == 6);  // the remainder
  for (std::size_t i = 1; i < result.records.size(); ++i)
    CHECK(result.records[i].n_pseudo > result.records[i - 1].n_pseudo);
}

TEST_CASE("a stale dev F1 stops the loop after convergence_patience iterations") {
  const auto f = make_fixture();
  auto config = small_config();
  config.max_epochs = 0;  // fits are no-ops: dev F1 can never improve
  config.k = 1;
  config.iterations_cap = 10;
  config.convergence_patience = 2;

  const auto result = train(Method::kSelf, f.corpus, f.dev, f.test, &f.sealed, config);
  CHECK(result.records.size() == 3);  // pretrain + two stale iterations
  CHECK(result.records[1].n_pseudo == 1);
  CHECK(result.records[2].n_pseudo == 2);
}

TEST_CASE("equal promotion is bitwise-identical to zero exponents") {
  const auto f = make_fixture();
  auto weighted = small_config();
  weighted.weighted_promotion = true;
  weighted.alpha = 0.0;
  weighted.beta = 0.0;
  auto equal = small_config();
  equal.weighted_promotion = false;

  const auto a = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, weighted);
  const auto b = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, equal);
  CHECK(same_records(a.records, b.records));
  CHECK(a.predictor.softmax_weights == b.predictor.softmax_weights);
  CHECK(a.predictor.encoder.word_embeddings == b.predictor.encoder.word_embeddings);
  CHECK(a.retriever->relation_embeddings == b.retriever->relation_embeddings);
}

TEST_CASE("promotion weights follow the configured exponents and stay frozen") {
  const auto f = make_fixture();
  auto config = small_config();
  config.alpha = 2.0;
  config.beta = 0.5;
  config.iterations_cap = 3;

  const auto result = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, config);
  REQUIRE(result.records.size() >= 2);
  for (std::size_t t = 1; t < result.records.size(); ++t) {
    for (const auto& a : result.records[t].promoted) {
      CHECK(a.weight_p == std::pow(a.p, 2.0));
      CHECK(a.weight_q == std::pow(a.q, 0.5));
      CHECK(a.p > 0.0);
      CHECK(a.p <= 1.0);
      CHECK(a.q > 0.0);
      CHECK(a.q < 1.0);
    }
  }

  // Weights are frozen at promotion: a shorter run with the same seed
  // reproduces iteration 1 exactly, untouched by later iterations.
  auto shorter = config;
  shorter.iterations_cap = 1;
  const auto prefix = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, shorter);
  REQUIRE(prefix.records.size() == 2);
  REQUIRE(result.records[1].promoted.size() == prefix.records[1].promoted.size());
  for (std::size_t j = 0; j < prefix.records[1].promoted.size(); ++j) {
    CHECK(result.records[1].promoted[j].id == prefix.records[1].promoted[j].id);
    CHECK(result.records[1].promoted[j].weight_p == prefix.records[1].promoted[j].weight_p);
    CHECK(result.records[1].promoted[j].weight_q == prefix.records[1].promoted[j].weight_q);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto f = make_fixture();
  const auto config = small_config();
  const auto a = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, config);
  const auto b = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, config);
  CHECK(same_records(a.records, b.records));
  CHECK(a.predictor.softmax_weights == b.predictor.softmax_weights);
  CHECK(a.retriever->relation_embeddings == b.retriever->relation_embeddings);

  auto other = config;
  other.seed += 1;
  const auto c = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, other);
  CHECK(a.predictor.softmax_weights != c.predictor.softmax_weights);
}

TEST_CASE("every iteration preserves the labeled set and id disjointness") {
  const auto f = make_fixture();
  auto config = small_config();
  config.iterations_cap = 3;
  const std::size_t labeled_before = f.corpus.labeled.size();
  const std::size_t pool_before = f.corpus.unlabeled.size();

  const auto result = train(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, config);
  // The trainer works on an internal copy: the caller's corpus is untouched.
  CHECK(f.corpus.labeled.size() == labeled_before);
  CHECK(f.corpus.unlabeled.size() == pool_before);
  CHECK(f.corpus.pseudo.empty());

  int promoted_total = 0;
  for (std::size_t t = 1; t < result.records.size(); ++t) {
    promoted_total += static_cast<int>(result.records[t].promoted.size());
    CHECK(result.records[t].n_pseudo == promoted_total);
    CHECK(result.records[t].promoted.size() <= static_cast<std::size_t>(config.k));
    if (!result.records[t].promoted.empty())
      CHECK(result.records[t].sel_precision >= 0.0);
  }
  CHECK(promoted_total <= static_cast<int>(pool_before));
}

TEST_CASE("ensemble trains two predictors and reports through the first") {
  const auto f = make_fixture();
  auto config = small_config();
  config.iterations_cap = 1;
  const auto result = train(Method::kEnsemble, f.corpus, f.dev, f.test, &f.sealed, config);
  REQUIRE(result.predictor_b.has_value());
  CHECK_FALSE(result.retriever.has_value());
  // Different init streams: the two members must differ.
  CHECK(result.predictor.softmax_weights != result.predictor_b->softmax_weights);
}

TEST_CASE("gold training equals supervised when the pool is empty") {
  auto f = make_fixture();
  f.corpus.unlabeled.clear();
  const auto config = small_config();
  SealedTruth empty_truth;

  const auto gold = train(Method::kGold, f.corpus, f.dev, f.test, &empty_truth, config);
  const auto supervised = train(Method::kSupervised, f.corpus, f.dev, f.test, nullptr, config);
  REQUIRE(gold.records.size() == 1);
  REQUIRE(supervised.records.size() == 1);
  CHECK(gold.predictor.softmax_weights == supervised.predictor.softmax_weights);
  CHECK(gold.predictor.softmax_bias == supervised.predictor.softmax_bias);
  CHECK(gold.predictor.encoder.word_embeddings == supervised.predictor.encoder.word_embeddings);
  CHECK(same_records(gold.records, supervised.records));
}

TEST_CASE("gold training demands the sealed truth") {
  const auto f = make_fixture();
  CHECK_THROWS_AS(train(Method::kGold, f.corpus, f.dev, f.test, nullptr, small_config()),
                  std::invalid_argument);

  // A sealed map that lacks a pool id fails when that id is promoted.
  SealedTruth partial({{f.corpus.unlabeled[0].id, 0}});
  CHECK_THROWS_AS(train(Method::kGold, f.corpus, f.dev, f.test, &partial, small_config()),
                  std::out_of_range);
}

TEST_CASE("gold consumes the whole pool at its true labels in one fit") {
  const auto f = make_fixture();
  const auto result = train(Method::kGold, f.corpus, f.dev, f.test, &f.sealed, small_config());
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].n_pseudo == static_cast<int>(f.corpus.unlabeled.size()));
}

TEST_CASE("pretrain_and_select reproduces the first training batch") {
  const auto f = make_fixture();
  const auto config = small_config();

  bool some_batch_nonempty = false;
  for (const auto method : {Method::kSelf, Method::kDualRE, Method::kEnsemble}) {
    CAPTURE(method_name(method));
    const auto batch = pretrain_and_select(method, f.corpus, f.dev, config);
    const auto result = train(method, f.corpus, f.dev, f.test, &f.sealed, config);
    if (batch.items.empty()) {
      // An empty first batch stops the loop before anything is recorded.
      CHECK(result.records.size() == 1);
      continue;
    }
    some_batch_nonempty = true;
    REQUIRE(result.records.size() >= 2);
    const auto& first = result.records[1].promoted;
    REQUIRE(batch.items.size() == first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(batch.items[i].id == first[i].id);
      CHECK(batch.items[i].label == first[i].label);
      CHECK(batch.items[i].p_confidence == first[i].p);
      CHECK(batch.items[i].q_score == first[i].q);
    }
  }
  CHECK(some_batch_nonempty);  // self-selection always promotes from a pool

  CHECK_THROWS_AS(pretrain_and_select(Method::kSupervised, f.corpus, f.dev, config),
                  std::invalid_argument);
  CHECK_THROWS_AS(pretrain_and_select(Method::kGold, f.corpus, f.dev, config),
                  std::invalid_argument);
}

TEST_CASE("config keys apply onto the right knobs") {
  TrainConfig config;
  apply_train_key(config, "model.word_dim", "12");
  apply_train_key(config, "model.pos_dim", "3");
  apply_train_key(config, "model.hidden_dim", "20");
  apply_train_key(config, "model.max_dist", "15");
  apply_train_key(config, "optim.learning_rate", "0.25");
  apply_train_key(config, "optim.batch_size", "16");
  apply_train_key(config, "optim.max_epochs", "9");
  apply_train_key(config, "optim.patience", "4");
  apply_train_key(config, "promote.alpha", "1.5");
  apply_train_key(config, "promote.beta", "0.5");
  apply_train_key(config, "promote.mode", "equal");
  apply_train_key(config, "loop.iterations_cap", "5");
  apply_train_key(config, "loop.k", "25");
  apply_train_key(config, "loop.convergence_patience", "3");
  apply_train_key(config, "select.distribution", "top-4k");
  apply_train_key(config, "select.expansion_factor", "1.5");
  apply_train_key(config, "select.max_expansions", "9");
  apply_train_key(config, "retriever.negatives", "2");
  apply_train_key(config, "retriever.dropout", "0.1");
  apply_train_key(config, "seed", "99");

  CHECK(config.encoder.word_dim == 12);
  CHECK(config.encoder.pos_dim == 3);
  CHECK(config.encoder.hidden_dim == 20);
  CHECK(config.encoder.max_dist == 15);
  CHECK(config.learning_rate == 0.25);
  CHECK(config.batch_size == 16);
  CHECK(config.max_epochs == 9);
  CHECK(config.patience == 4);
  CHECK(config.alpha == 1.5);
  CHECK(config.beta == 0.5);
  CHECK_FALSE(config.weighted_promotion);
  CHECK(config.iterations_cap == 5);
  CHECK(config.k == 25);
  CHECK(config.convergence_patience == 3);
  CHECK(config.distribution_mode == DistributionMode::kTopNk);
  CHECK(config.distribution_n == 4);
  CHECK(config.expansion_factor == 1.5);
  CHECK(config.max_expansions == 9);
  CHECK(config.negatives_per_positive == 2);
  CHECK(config.retrieval_dropout == 0.1);
  CHECK(config.seed == 99);

  apply_train_key(config, "retriever.negatives", "all");
  CHECK(config.negatives_per_positive == kAllNegatives);
  apply_train_key(config, "select.distribution", "true");
  CHECK(config.distribution_mode == DistributionMode::kTrue);

  CHECK_THROWS_WITH_AS(apply_train_key(config, "bogus.key", "1"), doctest::Contains("bogus.key"),
                       std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "select.distribution", "top-8k"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "select.distribution", "top-0k"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "optim.learning_rate", "0"), std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "optim.batch_size", "chunky"), std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "promote.mode", "sometimes"), std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "retriever.dropout", "1.0"), std::invalid_argument);
  CHECK_THROWS_AS(apply_train_key(config, "select.expansion_factor", "1.0"),
                  std::invalid_argument);
}

TEST_CASE("grid search enumerates the cross product and picks the max dev F1") {
  const auto f = make_fixture();
  auto base = small_config();
  base.iterations_cap = 1;
  base.max_epochs = 3;

  const std::vector<GridAxis> axes{{"optim.max_epochs", {"1", "4"}},
                                   {"loop.k", {"3", "6"}}};
  const auto grid =
      grid_search(Method::kSelf, f.corpus, f.dev, f.test, &f.sealed, base, axes, false, 1);

  REQUIRE(grid.points.size() == 4);
  CHECK(grid.points[0].description == "optim.max_epochs=1 loop.k=3");
  CHECK(grid.points[1].description == "optim.max_epochs=1 loop.k=6");
  CHECK(grid.points[2].description == "optim.max_epochs=4 loop.k=3");
  CHECK(grid.points[3].description == "optim.max_epochs=4 loop.k=6");

  REQUIRE(grid.best_index >= 0);
  for (const auto& point : grid.points)
    CHECK(grid.points[grid.best_index].dev_f1 >= point.dev_f1);

  // Each point's score equals an equivalent standalone run.
  for (int i = 0; i < 4; ++i) {
    const auto solo =
        train(Method::kSelf, f.corpus, f.dev, f.test, &f.sealed, grid.points[i].config);
    CHECK(grid.points[i].dev_f1 == solo.records.back().dev.f1);
  }
}

TEST_CASE("grid ties resolve to the earliest point") {
  const auto f = make_fixture();
  auto base = small_config();
  base.iterations_cap = 0;  // alpha never used: every point scores the same

  const std::vector<GridAxis> axes{{"promote.alpha", {"0.5", "1", "2"}}};
  const auto grid =
      grid_search(Method::kDualRE, f.corpus, f.dev, f.test, &f.sealed, base, axes, false, 1);
  REQUIRE(grid.points.size() == 3);
  CHECK(grid.points[0].dev_f1 == grid.points[1].dev_f1);
  CHECK(grid.points[1].dev_f1 == grid.points[2].dev_f1);
  CHECK(grid.best_index == 0);
}

TEST_CASE("greedy grid sweeps axes in order, freezing each winner") {
  const auto f = make_fixture();
  auto base = small_config();
  base.iterations_cap = 1;

  const std::vector<GridAxis> axes{{"optim.max_epochs", {"0", "5"}},
                                   {"loop.k", {"2", "4"}}};
  const auto grid =
      grid_search(Method::kSelf, f.corpus, f.dev, f.test, &f.sealed, base, axes, true, 1);

  // Two stages of two points each, not the 4-point cross product order.
  REQUIRE(grid.points.size() == 4);
  CHECK(grid.points[0].description == "optim.max_epochs=0");
  CHECK(grid.points[1].description == "optim.max_epochs=5");
  CHECK(grid.points[2].description.find("loop.k=2") != std::string::npos);
  CHECK(grid.points[3].description.find("loop.k=4") != std::string::npos);
  // Stage two carries the frozen stage-one winner in its description.
  CHECK(grid.points[2].description.find("optim.max_epochs=") != std::string::npos);
  CHECK(grid.best_index >= 2);

  CHECK_THROWS_AS(grid_search(Method::kSelf, f.corpus, f.dev, f.test, &f.sealed, base, {},
                              false, 1),
                  std::invalid_argument);
}

TEST_CASE("training rejects an empty labeled set") {
  auto f = make_fixture();
  f.corpus.labeled.clear();
  CHECK_THROWS_AS(train(Method::kSelf, f.corpus, f.dev, f.test, nullptr, small_config()),
                  std::invalid_argument);
}
