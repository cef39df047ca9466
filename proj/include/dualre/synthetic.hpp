#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dualre/types.hpp"

namespace dualre {

// Trigger-token corpus with known ground truth. Each positive relation owns
// one dedicated trigger token; a sentence expresses that relation exactly
// when the trigger appears between the entity spans. A trigger_noise
// fraction of each relation's examples has the trigger replaced by a random
// confounder while keeping the label, which injects label noise.
struct SyntheticConfig {
  int num_relations = 3;        // positive relations; no_relation is added on top
  int vocab_size = 40;          // triggers occupy the first num_relations slots
  int examples_per_relation = 50;
  double trigger_noise = 0.0;   // in [0, 1]
  double negative_fraction = 0.0;  // share of no_relation examples in the output
  std::uint64_t seed = 0;
};

std::pair<RelationSchema, std::vector<LabeledExample>> generate_synthetic(
    const SyntheticConfig& config);

}  // namespace dualre
