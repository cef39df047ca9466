#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dualre {

// A sentence with a subject and an object entity span. Spans are inclusive
// token-index pairs and must not overlap.
struct RelationMention {
  std::string id;
  std::vector<std::string> tokens;
  std::pair<int, int> subj_span{0, 0};
  std::pair<int, int> obj_span{0, 0};
  std::optional<std::string> subj_type;
  std::optional<std::string> obj_type;
  std::optional<std::vector<std::string>> pos_tags;
  std::optional<std::vector<std::string>> ner_tags;
};

// Throws std::invalid_argument naming the mention id on any invariant
// violation (span out of bounds, overlapping spans, tag length mismatch).
void validate_mention(const RelationMention& m);

inline constexpr const char* kNoRelationLabel = "no_relation";

// Ordered label set including the distinguished no_relation label.
struct RelationSchema {
  std::vector<std::string> labels;
  int no_relation_index = -1;

  int size() const { return static_cast<int>(labels.size()); }
  const std::string& label(int idx) const { return labels.at(idx); }
  bool is_no_relation(int idx) const { return idx == no_relation_index; }

  // -1 if unknown
  int index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
      if (labels[i] == label) return i;
    return -1;
  }

  // Builds a schema from observed label names: sorted unique, with
  // no_relation appended when absent. Throws if fewer than 2 labels result.
  static RelationSchema from_observed(std::vector<std::string> observed);
};

void validate_schema(const RelationSchema& schema);

struct LabeledExample {
  RelationMention mention;
  int label = -1;  // index into RelationSchema
};

// A pseudo-labeled example promoted from the unlabeled pool. Weights are
// frozen at promotion time and never recomputed.
struct PseudoExample {
  LabeledExample example;
  double weight_p = 1.0;  // predictor-side promotion weight
  double weight_q = 1.0;  // retriever-side promotion weight
};

// Held-back gold labels of the unlabeled pool. Only the evaluation module
// (selection-precision analysis) and the gold-label trainer read it.
class SealedTruth {
 public:
  SealedTruth() = default;
  explicit SealedTruth(std::unordered_map<std::string, int> labels)
      : labels_(std::move(labels)) {}

  bool empty() const { return labels_.empty(); }
  std::size_t size() const { return labels_.size(); }

  // Throws std::out_of_range naming the id when absent.
  int label_of(const std::string& id) const {
    auto it = labels_.find(id);
    if (it == labels_.end())
      throw std::out_of_range("sealed truth has no label for mention '" + id + "'");
    return it->second;
  }

  bool contains(const std::string& id) const { return labels_.count(id) > 0; }

  const std::unordered_map<std::string, int>& unseal() const { return labels_; }

 private:
  std::unordered_map<std::string, int> labels_;
};

// Labeled set L, pseudo-labeled set L_U and unlabeled pool U. Mention ids
// across the three parts are pairwise disjoint; promote() preserves that.
struct CorpusState {
  RelationSchema schema;
  std::vector<LabeledExample> labeled;    // L
  std::vector<PseudoExample> pseudo;      // L_U
  std::vector<RelationMention> unlabeled; // U

  // Throws std::invalid_argument on duplicated ids.
  void check_disjoint_ids() const;

  // Moves the given pool mentions into the pseudo set with the supplied
  // label and frozen weights. Every id must currently be in the pool.
  void promote(const std::vector<std::tuple<std::string, int, double, double>>& items);
};

struct SplitSpec {
  double labeled_fraction = 0.1;    // in (0, 1]
  double unlabeled_fraction = 0.5;  // in [0, 1)
  double dev_fraction = 0.0;        // in [0, 1)
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<LabeledExample> labeled;
  std::vector<RelationMention> unlabeled;  // labels stripped
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;  // everything left over
  SealedTruth sealed_truth;          // gold labels of the unlabeled part
};

}  // namespace dualre
