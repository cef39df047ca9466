#include "dualre/vocab.hpp"

#include <algorithm>
#include <set>

namespace dualre {

Vocabulary::Vocabulary() {
  tokens_ = {kOovToken};
  index_[kOovToken] = 0;
}

Vocabulary Vocabulary::build(const std::vector<const RelationMention*>& mentions) {
  std::set<std::string> unique;
  for (const auto* m : mentions)
    for (const auto& t : m->tokens) unique.insert(t);
  unique.erase(kOovToken);
  Vocabulary v;
  for (const auto& t : unique) {
    v.index_[t] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(t);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kOovToken)
    throw std::invalid_argument("vocabulary token list must start with the OOV symbol");
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  for (int i = 0; i < static_cast<int>(v.tokens_.size()); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second)
      throw std::invalid_argument("vocabulary contains duplicate token '" + v.tokens_[i] + "'");
  }
  return v;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

}  // namespace dualre
