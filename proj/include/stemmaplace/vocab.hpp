#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stemmaplace/pairgen.hpp"

namespace stemmaplace {

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocab();
  // Reserved entries first, then `tokens` (duplicates ignored) in the given order.
  explicit Vocab(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  // Unknown tokens map to kUnk.
  int index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  // Non-reserved tokens in index order.
  std::vector<std::string> known_tokens() const;

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Vocabs {
  Vocab source;
  Vocab target;
};

// Sorted distinct source tokens and distinct target tokens (numerically
// sorted) of the training set. Throws EmptyTrainingSet.
Vocabs build_vocab(const std::vector<PairInstance>& train);

}  // namespace stemmaplace
