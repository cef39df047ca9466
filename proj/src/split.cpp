#include "dualre/split.hpp"

#include <cmath>

#include "dualre/apportion.hpp"
#include "dualre/rng.hpp"

namespace dualre {
namespace {

// Per-label counts for one part: quotas fraction*count_y apportioned to a
// house of round(fraction*N), each capped by what the label still has.
std::vector<int> part_counts(const std::vector<int>& available, double fraction) {
  std::vector<double> quotas(available.size());
  double total = 0.0;
  for (std::size_t y = 0; y < available.size(); ++y) {
    quotas[y] = fraction * available[y];
    total += quotas[y];
  }
  auto counts = apportion_largest_remainder(quotas, static_cast<int>(std::llround(total)));
  for (std::size_t y = 0; y < counts.size(); ++y)
    if (counts[y] > available[y]) counts[y] = available[y];
  return counts;
}

}  // namespace

SplitResult stratified_split(const std::vector<LabeledExample>& data,
                             const RelationSchema& schema, const SplitSpec& spec) {
  if (spec.labeled_fraction <= 0.0 || spec.labeled_fraction > 1.0)
    throw std::invalid_argument("split: labeled_fraction must be in (0, 1]");
  if (spec.unlabeled_fraction < 0.0 || spec.unlabeled_fraction >= 1.0)
    throw std::invalid_argument("split: unlabeled_fraction must be in [0, 1)");
  if (spec.dev_fraction < 0.0 || spec.dev_fraction >= 1.0)
    throw std::invalid_argument("split: dev_fraction must be in [0, 1)");
  if (spec.labeled_fraction + spec.unlabeled_fraction + spec.dev_fraction > 1.0 + 1e-12)
    throw std::invalid_argument("split: part fractions exceed 1");

  const int num_labels = schema.size();
  std::vector<std::vector<int>> by_label(num_labels);
  for (int i = 0; i < static_cast<int>(data.size()); ++i) {
    const int y = data[i].label;
    if (y < 0 || y >= num_labels)
      throw std::invalid_argument("split: example '" + data[i].mention.id + "' has invalid label");
    by_label[y].push_back(i);
  }

  Rng rng(mix_seed(spec.seed, /*stream=*/1));
  for (auto& idxs : by_label) rng.shuffle(idxs);

  std::vector<int> counts(num_labels);
  for (int y = 0; y < num_labels; ++y) counts[y] = static_cast<int>(by_label[y].size());

  // Every part's fraction is of the full per-label count; parts are carved
  // in order dev -> labeled -> unlabeled, capped by what is still left so
  // the parts stay disjoint even under adversarial rounding.
  const auto dev_counts = part_counts(counts, spec.dev_fraction);
  auto labeled_counts = part_counts(counts, spec.labeled_fraction);
  for (int y = 0; y < num_labels; ++y) {
    const int left = counts[y] - dev_counts[y];
    if (labeled_counts[y] > left) labeled_counts[y] = left;
  }
  auto unlabeled_counts = part_counts(counts, spec.unlabeled_fraction);
  for (int y = 0; y < num_labels; ++y) {
    const int left = counts[y] - dev_counts[y] - labeled_counts[y];
    if (unlabeled_counts[y] > left) unlabeled_counts[y] = left;
  }

  int labeled_total = 0;
  for (int c : labeled_counts) labeled_total += c;
  if (labeled_total == 0) throw std::invalid_argument("split: labeled_fraction produces an empty labeled set");

  SplitResult result;
  std::unordered_map<std::string, int> sealed;
  for (int y = 0; y < num_labels; ++y) {
    const auto& idxs = by_label[y];
    int pos = 0;
    for (int i = 0; i < dev_counts[y]; ++i) result.dev.push_back(data[idxs[pos++]]);
    for (int i = 0; i < labeled_counts[y]; ++i) result.labeled.push_back(data[idxs[pos++]]);
    for (int i = 0; i < unlabeled_counts[y]; ++i) {
      const auto& e = data[idxs[pos++]];
      result.unlabeled.push_back(e.mention);
      sealed[e.mention.id] = e.label;
    }
    for (; pos < static_cast<int>(idxs.size()); ++pos) result.test.push_back(data[idxs[pos]]);
  }
  result.sealed_truth = SealedTruth(std::move(sealed));
  return result;
}

}  // namespace dualre
