#pragma once

#include <vector>

#include "dualre/types.hpp"

namespace dualre {

// Stratified split into (labeled, unlabeled, dev, test) with largest-remainder
// per-label counts. Each part's fraction is of the full dataset; parts are
// carved per label in order dev, labeled, unlabeled; whatever is left becomes
// the test part. Unlabeled labels are stripped into the sealed side map.
// Deterministic under spec.seed; parts are id-disjoint.
SplitResult stratified_split(const std::vector<LabeledExample>& data,
                             const RelationSchema& schema, const SplitSpec& spec);

}  // namespace dualre
