#include "dualre/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "dualre/rng.hpp"

namespace dualre {
namespace {

std::string token_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", i);
  return buf;
}

std::string relation_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rel_%02d", i);
  return buf;
}

}  // namespace

std::pair<RelationSchema, std::vector<LabeledExample>> generate_synthetic(
    const SyntheticConfig& cfg) {
  if (cfg.num_relations < 2) throw std::invalid_argument("synthetic: num_relations must be >= 2");
  if (cfg.examples_per_relation < 1)
    throw std::invalid_argument("synthetic: examples_per_relation must be >= 1");
  if (cfg.trigger_noise < 0.0 || cfg.trigger_noise > 1.0)
    throw std::invalid_argument("synthetic: trigger_noise must be in [0, 1]");
  if (cfg.negative_fraction < 0.0 || cfg.negative_fraction >= 1.0)
    throw std::invalid_argument("synthetic: negative_fraction must be in [0, 1)");
  if (cfg.vocab_size < cfg.num_relations + 1)
    throw std::invalid_argument("synthetic: vocab of " + std::to_string(cfg.vocab_size) +
                                " tokens cannot host " + std::to_string(cfg.num_relations) +
                                " distinct triggers plus fillers");

  // Triggers are the first num_relations vocabulary slots, so two corpora
  // generated with the same dimensions but different seeds share trigger
  // semantics (needed for train/test pairs).
  std::vector<std::string> vocab(cfg.vocab_size);
  for (int i = 0; i < cfg.vocab_size; ++i) vocab[i] = token_name(i);
  const int num_fillers = cfg.vocab_size - cfg.num_relations;
  auto filler = [&](int i) -> const std::string& { return vocab[cfg.num_relations + i]; };

  std::vector<std::string> label_names;
  for (int r = 0; r < cfg.num_relations; ++r) label_names.push_back(relation_name(r));
  label_names.emplace_back(kNoRelationLabel);
  RelationSchema schema = RelationSchema::from_observed(label_names);

  const int n_pos = cfg.num_relations * cfg.examples_per_relation;
  const int n_neg = static_cast<int>(
      std::llround(cfg.negative_fraction * n_pos / (1.0 - cfg.negative_fraction)));

  Rng rng(mix_seed(cfg.seed, /*stream=*/2));
  std::vector<LabeledExample> examples;
  examples.reserve(n_pos + n_neg);
  int next_id = 0;

  // mid holds the inter-entity segment; trigger_slot < 0 means none.
  auto make_example = [&](int label_index, bool with_trigger, int trigger_token) {
    const int n_pre = rng.next_int(0, 2);
    const int n_mid_fillers = rng.next_int(1, 3);
    const int n_post = rng.next_int(0, 2);
    std::vector<std::string> mid;
    for (int i = 0; i < n_mid_fillers; ++i) mid.push_back(filler(rng.next_int(0, num_fillers - 1)));
    if (with_trigger) {
      const int slot = rng.next_int(0, static_cast<int>(mid.size()));
      mid.insert(mid.begin() + slot, vocab[trigger_token]);
    }
    RelationMention m;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "syn_%06d", next_id++);
    m.id = idbuf;
    for (int i = 0; i < n_pre; ++i) m.tokens.push_back(filler(rng.next_int(0, num_fillers - 1)));
    const int subj = static_cast<int>(m.tokens.size());
    m.tokens.push_back(filler(rng.next_int(0, num_fillers - 1)));
    for (auto& t : mid) m.tokens.push_back(std::move(t));
    const int obj = static_cast<int>(m.tokens.size());
    m.tokens.push_back(filler(rng.next_int(0, num_fillers - 1)));
    for (int i = 0; i < n_post; ++i) m.tokens.push_back(filler(rng.next_int(0, num_fillers - 1)));
    m.subj_span = {subj, subj};
    m.obj_span = {obj, obj};
    examples.push_back(LabeledExample{std::move(m), label_index});
  };

  for (int r = 0; r < cfg.num_relations; ++r) {
    const int label_index = schema.index_of(relation_name(r));
    const int n_noisy =
        static_cast<int>(std::llround(cfg.trigger_noise * cfg.examples_per_relation));
    std::vector<int> slots(cfg.examples_per_relation);
    for (int i = 0; i < cfg.examples_per_relation; ++i) slots[i] = i;
    rng.shuffle(slots);
    for (int i = 0; i < cfg.examples_per_relation; ++i) {
      const bool noisy = slots[i] < n_noisy;
      if (!noisy) {
        make_example(label_index, /*with_trigger=*/true, r);
      } else {
        // Confounder: any vocabulary token except the true trigger. It may
        // be another relation's trigger, which is the drift-inducing case.
        int confounder = rng.next_int(0, cfg.vocab_size - 2);
        if (confounder >= r) ++confounder;
        make_example(label_index, /*with_trigger=*/true, confounder);
      }
    }
  }
  for (int i = 0; i < n_neg; ++i)
    make_example(schema.no_relation_index, /*with_trigger=*/false, /*trigger_token=*/-1);

  rng.shuffle(examples);
  return {std::move(schema), std::move(examples)};
}

}  // namespace dualre
