#include "dualre/trainer.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "dualre/rng.hpp"

namespace dualre {

Method parse_method(const std::string& name) {
  if (name == "dualre") return Method::kDualRE;
  if (name == "dualre-pairwise") return Method::kDualREPairwise;
  if (name == "self") return Method::kSelf;
  if (name == "ensemble") return Method::kEnsemble;
  if (name == "gold") return Method::kGold;
  if (name == "supervised") return Method::kSupervised;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kDualRE: return "dualre";
    case Method::kDualREPairwise: return "dualre-pairwise";
    case Method::kSelf: return "self";
    case Method::kEnsemble: return "ensemble";
    case Method::kGold: return "gold";
    case Method::kSupervised: return "supervised";
  }
  throw std::logic_error("unreachable method");
}

namespace {

int parse_int(const std::string& key, const std::string& value, int min_value) {
  int v = 0;
  try {
    std::size_t used = 0;
    v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not an integer");
  }
  if (v < min_value)
    throw std::invalid_argument("config key '" + key + "': value must be at least " +
                                std::to_string(min_value));
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not a number");
  }
}

}  // namespace

void apply_train_key(TrainConfig& config, const std::string& key, const std::string& value) {
  if (key == "model.word_dim") config.encoder.word_dim = parse_int(key, value, 1);
  else if (key == "model.pos_dim") config.encoder.pos_dim = parse_int(key, value, 1);
  else if (key == "model.hidden_dim") config.encoder.hidden_dim = parse_int(key, value, 1);
  else if (key == "model.max_dist") config.encoder.max_dist = parse_int(key, value, 1);
  else if (key == "optim.learning_rate") {
    config.learning_rate = parse_double(key, value);
    if (config.learning_rate <= 0.0)
      throw std::invalid_argument("config key 'optim.learning_rate': must be positive");
  } else if (key == "optim.batch_size") config.batch_size = parse_int(key, value, 1);
  else if (key == "optim.max_epochs") config.max_epochs = parse_int(key, value, 0);
  else if (key == "optim.patience") config.patience = parse_int(key, value, 1);
  else if (key == "promote.alpha" || key == "promote.beta") {
    const double v = parse_double(key, value);
    if (v < 0.0) throw std::invalid_argument("config key '" + key + "': must be non-negative");
    (key == "promote.alpha" ? config.alpha : config.beta) = v;
  } else if (key == "promote.mode") {
    if (value == "equal") config.weighted_promotion = false;
    else if (value == "weighted") config.weighted_promotion = true;
    else throw std::invalid_argument("config key 'promote.mode': expected equal or weighted");
  } else if (key == "loop.iterations_cap") config.iterations_cap = parse_int(key, value, 0);
  else if (key == "loop.k") config.k = parse_int(key, value, 0);
  else if (key == "loop.convergence_patience")
    config.convergence_patience = parse_int(key, value, 1);
  else if (key == "select.distribution") {
    if (value == "true") {
      config.distribution_mode = DistributionMode::kTrue;
      config.distribution_n = 1;
    } else if (value.size() == 6 && value.rfind("top-", 0) == 0 && value.back() == 'k' &&
               value[4] >= '1' && value[4] <= '7') {
      config.distribution_mode = DistributionMode::kTopNk;
      config.distribution_n = value[4] - '0';
    } else {
      throw std::invalid_argument(
          "config key 'select.distribution': expected true or top-1k .. top-7k");
    }
  } else if (key == "select.expansion_factor") {
    config.expansion_factor = parse_double(key, value);
    if (!(config.expansion_factor > 1.0))
      throw std::invalid_argument("config key 'select.expansion_factor': must exceed 1");
  } else if (key == "select.max_expansions") config.max_expansions = parse_int(key, value, 0);
  else if (key == "retriever.negatives") {
    if (value == "all") config.negatives_per_positive = kAllNegatives;
    else config.negatives_per_positive = parse_int(key, value, 1);
  } else if (key == "retriever.dropout") {
    config.retrieval_dropout = parse_double(key, value);
    if (config.retrieval_dropout < 0.0 || config.retrieval_dropout >= 1.0)
      throw std::invalid_argument("config key 'retriever.dropout': must be in [0, 1)");
  } else if (key == "seed") {
    try {
      std::size_t used = 0;
      config.seed = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("config key 'seed': '" + value + "' is not an integer");
    }
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ScoreReport evaluate_model(const PredictorModel& model, const Vocabulary& vocab,
                           const std::vector<LabeledExample>& data,
                           const RelationSchema& schema) {
  std::vector<const RelationMention*> mentions;
  std::vector<int> gold;
  mentions.reserve(data.size());
  for (const auto& ex : data) {
    mentions.push_back(&ex.mention);
    gold.push_back(ex.label);
  }
  return score(gold, predict_labels(model, vocab, mentions), schema);
}

namespace {

Vocabulary corpus_vocabulary(const CorpusState& corpus) {
  std::vector<const RelationMention*> mentions;
  mentions.reserve(corpus.labeled.size() + corpus.pseudo.size() + corpus.unlabeled.size());
  for (const auto& ex : corpus.labeled) mentions.push_back(&ex.mention);
  for (const auto& pe : corpus.pseudo) mentions.push_back(&pe.example.mention);
  for (const auto& m : corpus.unlabeled) mentions.push_back(&m);
  return Vocabulary::build(mentions);
}

// Training view of L (weight 1) plus L_U under the requested weight side.
std::vector<WeightedExample> weighted_set(const CorpusState& corpus, bool use_q) {
  std::vector<WeightedExample> out;
  out.reserve(corpus.labeled.size() + corpus.pseudo.size());
  for (const auto& ex : corpus.labeled) out.push_back({&ex, 1.0});
  for (const auto& pe : corpus.pseudo)
    out.push_back({&pe.example, use_q ? pe.weight_q : pe.weight_p});
  return out;
}

int effective_k(const TrainConfig& config, std::size_t pool_size) {
  if (config.k > 0) return config.k;
  return std::max<std::size_t>(1, pool_size / 10);
}

// Stream layout: 10..12 model inits; 20 + 4t + slot the fit of loop turn t
// (slot 0 predictor, 1 retriever, 2 second predictor).
std::uint64_t fit_seed(std::uint64_t seed, int iteration, int slot) {
  return mix_seed(seed, 20 + 4 * static_cast<std::uint64_t>(iteration) + slot);
}

FitOptions predictor_fit_options(const TrainConfig& c, std::uint64_t seed) {
  FitOptions o;
  o.learning_rate = c.learning_rate;
  o.batch_size = c.batch_size;
  o.max_epochs = c.max_epochs;
  o.patience = c.patience;
  o.seed = seed;
  return o;
}

RetrieverFitOptions retriever_fit_options(const TrainConfig& c, bool pairwise,
                                          std::uint64_t seed) {
  RetrieverFitOptions o;
  o.learning_rate = c.learning_rate;
  o.batch_size = c.batch_size;
  o.max_epochs = c.max_epochs;
  o.patience = c.patience;
  o.pairwise = pairwise;
  o.negatives_per_positive = c.negatives_per_positive;
  o.seed = seed;
  return o;
}

void validate_run_inputs(const CorpusState& corpus, const TrainConfig& config) {
  validate_schema(corpus.schema);
  corpus.check_disjoint_ids();
  if (corpus.labeled.empty()) throw std::invalid_argument("training needs a non-empty labeled set");
  if (config.alpha < 0.0 || config.beta < 0.0)
    throw std::invalid_argument("promotion exponents must be non-negative");
  if (config.iterations_cap < 0) throw std::invalid_argument("iterations_cap must be non-negative");
}

IterationRecord make_record(int iteration, const CorpusState& corpus,
                            const PredictorModel& model, const Vocabulary& vocab,
                            const std::vector<LabeledExample>& dev,
                            const std::vector<LabeledExample>& test) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.n_pseudo = static_cast<int>(corpus.pseudo.size());
  rec.dev = evaluate_model(model, vocab, dev, corpus.schema);
  rec.test = evaluate_model(model, vocab, test, corpus.schema);
  return rec;
}

// Applies the promotion-weight policy and moves the batch into L_U.
// Returns the audit trail (weights frozen here, never recomputed).
std::vector<PromotedAudit> promote_batch(CorpusState& corpus, const PromotedBatch& batch,
                                         const TrainConfig& config) {
  std::vector<PromotedAudit> audit;
  std::vector<std::tuple<std::string, int, double, double>> items;
  audit.reserve(batch.items.size());
  items.reserve(batch.items.size());
  for (const auto& item : batch.items) {
    PromotedAudit a;
    a.id = item.id;
    a.label = item.label;
    a.p = item.p_confidence;
    a.q = item.q_score;
    a.weight_p = config.weighted_promotion ? std::pow(item.p_confidence, config.alpha) : 1.0;
    a.weight_q = config.weighted_promotion ? std::pow(item.q_score, config.beta) : 1.0;
    items.emplace_back(a.id, a.label, a.weight_p, a.weight_q);
    audit.push_back(std::move(a));
  }
  corpus.promote(items);
  return audit;
}

double batch_precision(const PromotedBatch& batch, const SealedTruth* sealed) {
  if (sealed == nullptr || batch.items.empty()) return -1.0;
  std::vector<std::pair<std::string, int>> pairs;
  pairs.reserve(batch.items.size());
  for (const auto& item : batch.items) pairs.emplace_back(item.id, item.label);
  return selection_precision(pairs, *sealed);
}

// Shared loop skeleton: convergence = dev F1 failing to improve for
// config.convergence_patience consecutive iterations (skipped without dev).
struct Convergence {
  double best;
  int stale = 0;
  bool track;
  int patience;

  Convergence(double pretrain_f1, bool has_dev, int patience)
      : best(pretrain_f1), track(has_dev), patience(patience) {}

  bool stop_after(double f1) {
    if (!track) return false;
    if (f1 > best) {
      best = f1;
      stale = 0;
      return false;
    }
    return ++stale >= patience;
  }
};

}  // namespace

RunResult train_dualre(const CorpusState& corpus_in, const std::vector<LabeledExample>& dev,
                       const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                       const TrainConfig& config, bool pairwise_retrieval) {
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;
  const RelationSchema& schema = corpus.schema;

  RunResult result;
  result.method = pairwise_retrieval ? Method::kDualREPairwise : Method::kDualRE;
  result.schema = schema;
  result.vocab = corpus_vocabulary(corpus);
  const Vocabulary& vocab = result.vocab;

  PredictorModel predictor = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                                  mix_seed(config.seed, 10));
  RetrieverModel retriever = RetrieverModel::init(config.encoder, vocab.size(), schema.size(),
                                                  mix_seed(config.seed, 11));

  fit_predictor(predictor, vocab, weighted_set(corpus, false), dev, schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));
  fit_retriever(retriever, vocab, weighted_set(corpus, true), dev, schema,
                retriever_fit_options(config, pairwise_retrieval, fit_seed(config.seed, 0, 1)));
  result.records.push_back(make_record(0, corpus, predictor, vocab, dev, test));

  Convergence conv(result.records[0].dev.f1, !dev.empty(), config.convergence_patience);
  const int k = effective_k(config, corpus.unlabeled.size());

  for (int t = 1; t <= config.iterations_cap; ++t) {
    if (corpus.unlabeled.empty()) break;
    SelectionConfig sel;
    sel.k = k;
    sel.expansion_factor = config.expansion_factor;
    sel.max_expansions = config.max_expansions;
    sel.distribution =
        reference_distribution(config.distribution_mode, config.distribution_n, corpus.labeled,
                               predictor, vocab, corpus.unlabeled, k, schema);
    const PromotedBatch batch = select_joint(predictor, retriever, vocab, corpus.unlabeled, sel);
    if (batch.items.empty()) break;

    IterationRecord rec;
    rec.iteration = t;
    rec.sel_precision = batch_precision(batch, sealed);
    rec.promoted = promote_batch(corpus, batch, config);
    rec.n_pseudo = static_cast<int>(corpus.pseudo.size());

    fit_predictor(predictor, vocab, weighted_set(corpus, false), dev, schema,
                  predictor_fit_options(config, fit_seed(config.seed, t, 0)));
    fit_retriever(retriever, vocab, weighted_set(corpus, true), dev, schema,
                  retriever_fit_options(config, pairwise_retrieval, fit_seed(config.seed, t, 1)));

    rec.dev = evaluate_model(predictor, vocab, dev, schema);
    rec.test = evaluate_model(predictor, vocab, test, schema);
    result.records.push_back(std::move(rec));
    if (conv.stop_after(result.records.back().dev.f1)) break;
  }

  result.predictor = std::move(predictor);
  result.retriever = std::move(retriever);
  return result;
}

RunResult train_self(const CorpusState& corpus_in, const std::vector<LabeledExample>& dev,
                     const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                     const TrainConfig& config) {
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;
  const RelationSchema& schema = corpus.schema;

  RunResult result;
  result.method = Method::kSelf;
  result.schema = schema;
  result.vocab = corpus_vocabulary(corpus);
  const Vocabulary& vocab = result.vocab;

  PredictorModel predictor = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                                  mix_seed(config.seed, 10));
  fit_predictor(predictor, vocab, weighted_set(corpus, false), dev, schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));
  result.records.push_back(make_record(0, corpus, predictor, vocab, dev, test));

  Convergence conv(result.records[0].dev.f1, !dev.empty(), config.convergence_patience);
  const int k = effective_k(config, corpus.unlabeled.size());

  for (int t = 1; t <= config.iterations_cap; ++t) {
    if (corpus.unlabeled.empty()) break;
    const PromotedBatch batch = select_single(predictor, vocab, corpus.unlabeled, k);
    if (batch.items.empty()) break;

    IterationRecord rec;
    rec.iteration = t;
    rec.sel_precision = batch_precision(batch, sealed);
    rec.promoted = promote_batch(corpus, batch, config);
    rec.n_pseudo = static_cast<int>(corpus.pseudo.size());

    fit_predictor(predictor, vocab, weighted_set(corpus, false), dev, schema,
                  predictor_fit_options(config, fit_seed(config.seed, t, 0)));

    rec.dev = evaluate_model(predictor, vocab, dev, schema);
    rec.test = evaluate_model(predictor, vocab, test, schema);
    result.records.push_back(std::move(rec));
    if (conv.stop_after(result.records.back().dev.f1)) break;
  }

  result.predictor = std::move(predictor);
  return result;
}

RunResult train_ensemble(const CorpusState& corpus_in, const std::vector<LabeledExample>& dev,
                         const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                         const TrainConfig& config) {
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;
  const RelationSchema& schema = corpus.schema;

  RunResult result;
  result.method = Method::kEnsemble;
  result.schema = schema;
  result.vocab = corpus_vocabulary(corpus);
  const Vocabulary& vocab = result.vocab;

  PredictorModel first = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                              mix_seed(config.seed, 10));
  PredictorModel second = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                               mix_seed(config.seed, 12));
  fit_predictor(first, vocab, weighted_set(corpus, false), dev, schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));
  fit_predictor(second, vocab, weighted_set(corpus, true), dev, schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 2)));
  result.records.push_back(make_record(0, corpus, first, vocab, dev, test));

  Convergence conv(result.records[0].dev.f1, !dev.empty(), config.convergence_patience);
  const int k = effective_k(config, corpus.unlabeled.size());

  for (int t = 1; t <= config.iterations_cap; ++t) {
    if (corpus.unlabeled.empty()) break;
    const PromotedBatch batch = select_ensemble(first, second, vocab, corpus.unlabeled, k,
                                                config.expansion_factor, config.max_expansions);
    if (batch.items.empty()) break;

    IterationRecord rec;
    rec.iteration = t;
    rec.sel_precision = batch_precision(batch, sealed);
    rec.promoted = promote_batch(corpus, batch, config);
    rec.n_pseudo = static_cast<int>(corpus.pseudo.size());

    fit_predictor(first, vocab, weighted_set(corpus, false), dev, schema,
                  predictor_fit_options(config, fit_seed(config.seed, t, 0)));
    fit_predictor(second, vocab, weighted_set(corpus, true), dev, schema,
                  predictor_fit_options(config, fit_seed(config.seed, t, 2)));

    rec.dev = evaluate_model(first, vocab, dev, schema);
    rec.test = evaluate_model(first, vocab, test, schema);
    result.records.push_back(std::move(rec));
    if (conv.stop_after(result.records.back().dev.f1)) break;
  }

  result.predictor = std::move(first);
  result.predictor_b = std::move(second);
  return result;
}

RunResult train_gold(const CorpusState& corpus_in, const std::vector<LabeledExample>& dev,
                     const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                     const TrainConfig& config) {
  if (sealed == nullptr)
    throw std::invalid_argument("gold training needs the sealed ground-truth map");
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;

  std::vector<std::tuple<std::string, int, double, double>> items;
  items.reserve(corpus.unlabeled.size());
  for (const auto& m : corpus.unlabeled)
    items.emplace_back(m.id, sealed->label_of(m.id), 1.0, 1.0);
  corpus.promote(items);

  RunResult result;
  result.method = Method::kGold;
  result.schema = corpus.schema;
  result.vocab = corpus_vocabulary(corpus);

  PredictorModel predictor = PredictorModel::init(config.encoder, result.vocab.size(),
                                                  corpus.schema.size(), mix_seed(config.seed, 10));
  fit_predictor(predictor, result.vocab, weighted_set(corpus, false), dev, corpus.schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));
  result.records.push_back(make_record(0, corpus, predictor, result.vocab, dev, test));
  result.predictor = std::move(predictor);
  return result;
}

RunResult train_supervised(const CorpusState& corpus_in, const std::vector<LabeledExample>& dev,
                           const std::vector<LabeledExample>& test, const SealedTruth*,
                           const TrainConfig& config) {
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;

  RunResult result;
  result.method = Method::kSupervised;
  result.schema = corpus.schema;
  result.vocab = corpus_vocabulary(corpus);

  PredictorModel predictor = PredictorModel::init(config.encoder, result.vocab.size(),
                                                  corpus.schema.size(), mix_seed(config.seed, 10));
  fit_predictor(predictor, result.vocab, weighted_set(corpus, false), dev, corpus.schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));
  result.records.push_back(make_record(0, corpus, predictor, result.vocab, dev, test));
  result.predictor = std::move(predictor);
  return result;
}

RunResult train(Method method, const CorpusState& corpus, const std::vector<LabeledExample>& dev,
                const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                const TrainConfig& config) {
  switch (method) {
    case Method::kDualRE: return train_dualre(corpus, dev, test, sealed, config, false);
    case Method::kDualREPairwise: return train_dualre(corpus, dev, test, sealed, config, true);
    case Method::kSelf: return train_self(corpus, dev, test, sealed, config);
    case Method::kEnsemble: return train_ensemble(corpus, dev, test, sealed, config);
    case Method::kGold: return train_gold(corpus, dev, test, sealed, config);
    case Method::kSupervised: return train_supervised(corpus, dev, test, sealed, config);
  }
  throw std::logic_error("unreachable method");
}

PromotedBatch pretrain_and_select(Method method, const CorpusState& corpus_in,
                                  const std::vector<LabeledExample>& dev,
                                  const TrainConfig& config) {
  validate_run_inputs(corpus_in, config);
  CorpusState corpus = corpus_in;
  if (corpus.unlabeled.empty()) throw std::invalid_argument("selection needs a non-empty pool");
  const RelationSchema& schema = corpus.schema;
  const Vocabulary vocab = corpus_vocabulary(corpus);
  const int k = effective_k(config, corpus.unlabeled.size());

  PredictorModel predictor = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                                  mix_seed(config.seed, 10));
  fit_predictor(predictor, vocab, weighted_set(corpus, false), dev, schema,
                predictor_fit_options(config, fit_seed(config.seed, 0, 0)));

  switch (method) {
    case Method::kDualRE:
    case Method::kDualREPairwise: {
      RetrieverModel retriever = RetrieverModel::init(config.encoder, vocab.size(),
                                                      schema.size(), mix_seed(config.seed, 11));
      fit_retriever(retriever, vocab, weighted_set(corpus, true), dev, schema,
                    retriever_fit_options(config, method == Method::kDualREPairwise,
                                          fit_seed(config.seed, 0, 1)));
      SelectionConfig sel;
      sel.k = k;
      sel.expansion_factor = config.expansion_factor;
      sel.max_expansions = config.max_expansions;
      sel.distribution =
          reference_distribution(config.distribution_mode, config.distribution_n,
                                 corpus.labeled, predictor, vocab, corpus.unlabeled, k, schema);
      return select_joint(predictor, retriever, vocab, corpus.unlabeled, sel);
    }
    case Method::kSelf:
      return select_single(predictor, vocab, corpus.unlabeled, k);
    case Method::kEnsemble: {
      PredictorModel second = PredictorModel::init(config.encoder, vocab.size(), schema.size(),
                                                   mix_seed(config.seed, 12));
      fit_predictor(second, vocab, weighted_set(corpus, true), dev, schema,
                    predictor_fit_options(config, fit_seed(config.seed, 0, 2)));
      return select_ensemble(predictor, second, vocab, corpus.unlabeled, k,
                             config.expansion_factor, config.max_expansions);
    }
    case Method::kGold:
    case Method::kSupervised:
      throw std::invalid_argument("method '" + method_name(method) + "' has no selection step");
  }
  throw std::logic_error("unreachable method");
}

namespace {

// Runs every config on a small worker pool; results keep enumeration order
// so tie-breaking is independent of scheduling.
std::vector<double> run_points(Method method, const CorpusState& corpus,
                               const std::vector<LabeledExample>& dev,
                               const std::vector<LabeledExample>& test,
                               const SealedTruth* sealed,
                               const std::vector<TrainConfig>& configs, int jobs) {
  std::vector<double> dev_f1(configs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      try {
        dev_f1[i] = train(method, corpus, dev, test, sealed, configs[i]).records.back().dev.f1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(configs.size());
        return;
      }
    }
  };

  const int threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return dev_f1;
}

std::string describe(const std::vector<std::pair<std::string, std::string>>& assignment) {
  std::ostringstream out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (i) out << ' ';
    out << assignment[i].first << '=' << assignment[i].second;
  }
  return out.str();
}

}  // namespace

GridResult grid_search(Method method, const CorpusState& corpus,
                       const std::vector<LabeledExample>& dev,
                       const std::vector<LabeledExample>& test, const SealedTruth* sealed,
                       const TrainConfig& base, const std::vector<GridAxis>& axes,
                       bool greedy, int jobs) {
  if (axes.empty()) throw std::invalid_argument("grid search: no axes");
  for (const auto& axis : axes)
    if (axis.values.empty())
      throw std::invalid_argument("grid search: axis '" + axis.key + "' has no values");

  GridResult result;
  if (!greedy) {
    // Full cross-product, first axis outermost.
    std::vector<std::size_t> index(axes.size(), 0);
    std::vector<TrainConfig> configs;
    for (;;) {
      TrainConfig config = base;
      std::vector<std::pair<std::string, std::string>> assignment;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        apply_train_key(config, axes[a].key, axes[a].values[index[a]]);
        assignment.emplace_back(axes[a].key, axes[a].values[index[a]]);
      }
      result.points.push_back({describe(assignment), config, 0.0});
      configs.push_back(std::move(config));

      std::size_t a = axes.size();
      while (a > 0 && ++index[a - 1] == axes[a - 1].values.size()) index[--a] = 0;
      if (a == 0) break;
    }
    const auto dev_f1 = run_points(method, corpus, dev, test, sealed, configs, jobs);
    for (std::size_t i = 0; i < dev_f1.size(); ++i) {
      result.points[i].dev_f1 = dev_f1[i];
      if (result.best_index < 0 || dev_f1[i] > result.points[result.best_index].dev_f1)
        result.best_index = static_cast<int>(i);
    }
    return result;
  }

  // Greedy: sweep one axis at a time, freezing each winner.
  TrainConfig chosen = base;
  std::vector<std::pair<std::string, std::string>> fixed;
  for (const auto& axis : axes) {
    std::vector<TrainConfig> configs;
    const std::size_t stage_start = result.points.size();
    for (const auto& value : axis.values) {
      TrainConfig config = chosen;
      apply_train_key(config, axis.key, value);
      auto assignment = fixed;
      assignment.emplace_back(axis.key, value);
      result.points.push_back({describe(assignment), config, 0.0});
      configs.push_back(std::move(config));
    }
    const auto dev_f1 = run_points(method, corpus, dev, test, sealed, configs, jobs);
    std::size_t best = 0;
    for (std::size_t i = 0; i < dev_f1.size(); ++i) {
      result.points[stage_start + i].dev_f1 = dev_f1[i];
      if (dev_f1[i] > dev_f1[best]) best = i;
    }
    chosen = result.points[stage_start + best].config;
    fixed.emplace_back(axis.key, axis.values[best]);
    result.best_index = static_cast<int>(stage_start + best);
  }
  return result;
}

}  // namespace dualre
