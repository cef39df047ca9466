#include "dualre/types.hpp"

#include <algorithm>
#include <unordered_set>

namespace dualre {

void validate_mention(const RelationMention& m) {
  const int n = static_cast<int>(m.tokens.size());
  if (n < 1)
    throw std::invalid_argument("mention '" + m.id + "': empty token sequence");
  auto check_span = [&](const std::pair<int, int>& s, const char* name) {
    if (s.first < 0 || s.first > s.second || s.second >= n)
      throw std::invalid_argument("mention '" + m.id + "': invalid " + name + " span [" +
                                  std::to_string(s.first) + ", " + std::to_string(s.second) + "]");
  };
  check_span(m.subj_span, "subject");
  check_span(m.obj_span, "object");
  const bool overlap =
      m.subj_span.first <= m.obj_span.second && m.obj_span.first <= m.subj_span.second;
  if (overlap)
    throw std::invalid_argument("mention '" + m.id + "': subject and object spans overlap");
  auto check_tags = [&](const std::optional<std::vector<std::string>>& tags, const char* name) {
    if (tags && static_cast<int>(tags->size()) != n)
      throw std::invalid_argument("mention '" + m.id + "': " + name +
                                  " length does not match token count");
  };
  check_tags(m.pos_tags, "pos_tags");
  check_tags(m.ner_tags, "ner_tags");
}

void validate_schema(const RelationSchema& schema) {
  if (schema.size() < 2)
    throw std::invalid_argument("schema must contain at least 2 labels");
  if (schema.no_relation_index < 0 || schema.no_relation_index >= schema.size())
    throw std::invalid_argument("schema: no_relation index out of range");
  std::unordered_set<std::string> seen;
  for (const auto& l : schema.labels)
    if (!seen.insert(l).second)
      throw std::invalid_argument("schema: duplicate label '" + l + "'");
}

RelationSchema RelationSchema::from_observed(std::vector<std::string> observed) {
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
  RelationSchema schema;
  schema.labels = std::move(observed);
  auto it = std::find(schema.labels.begin(), schema.labels.end(), kNoRelationLabel);
  if (it == schema.labels.end()) {
    schema.labels.emplace_back(kNoRelationLabel);
    schema.no_relation_index = schema.size() - 1;
  } else {
    schema.no_relation_index = static_cast<int>(it - schema.labels.begin());
  }
  validate_schema(schema);
  return schema;
}

void CorpusState::check_disjoint_ids() const {
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& id) {
    if (!seen.insert(id).second)
      throw std::invalid_argument("corpus state: duplicate mention id '" + id + "'");
  };
  for (const auto& e : labeled) add(e.mention.id);
  for (const auto& p : pseudo) add(p.example.mention.id);
  for (const auto& m : unlabeled) add(m.id);
}

void CorpusState::promote(
    const std::vector<std::tuple<std::string, int, double, double>>& items) {
  std::unordered_map<std::string, std::tuple<int, double, double>> wanted;
  for (const auto& [id, label, wp, wq] : items) {
    if (!wanted.emplace(id, std::make_tuple(label, wp, wq)).second)
      throw std::invalid_argument("promote: duplicate id '" + id + "' in batch");
  }
  // Validate before mutating so a bad batch leaves the corpus untouched.
  std::size_t found = 0;
  for (const auto& m : unlabeled) found += wanted.count(m.id);
  if (found != wanted.size())
    throw std::invalid_argument("promote: batch contains ids not present in the pool");

  std::vector<RelationMention> remaining;
  remaining.reserve(unlabeled.size() - found);
  for (auto& m : unlabeled) {
    auto it = wanted.find(m.id);
    if (it == wanted.end()) {
      remaining.push_back(std::move(m));
      continue;
    }
    const auto& [label, wp, wq] = it->second;
    pseudo.push_back(PseudoExample{LabeledExample{std::move(m), label}, wp, wq});
  }
  unlabeled = std::move(remaining);
}

}  // namespace dualre
