#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualre/types.hpp"

namespace dualre {

inline constexpr const char* kOovToken = "<oov>";

// Token-to-row mapping for the embedding table. Index 0 is the reserved
// OOV symbol; every token not present at build time maps there.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<const RelationMention*>& mentions);
  static Vocabulary from_tokens(std::vector<std::string> tokens);  // checkpoint load

  int id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : it->second;
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the ordered token list; recorded in checkpoint headers.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace dualre
