#include "stemmaplace/vocab.hpp"

#include <algorithm>
#include <set>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& tokens) {
  tokens_ = {"<pad>", "<s>", "</s>", "<unk>"};
  for (int i = 0; i < kReserved; ++i) index_.emplace(tokens_[static_cast<std::size_t>(i)], i);
  for (const auto& t : tokens) {
    if (index_.count(t)) continue;
    index_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(t);
  }
}

int Vocab::index(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

std::vector<std::string> Vocab::known_tokens() const {
  return {tokens_.begin() + kReserved, tokens_.end()};
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

Vocabs build_vocab(const std::vector<PairInstance>& train) {
  if (train.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training instances");
  std::set<std::string> src;
  std::set<std::string> tgt;
  for (const auto& inst : train) {
    src.insert(inst.source.begin(), inst.source.end());
    tgt.insert(inst.target);
  }
  std::vector<std::string> targets(tgt.begin(), tgt.end());
  std::stable_sort(targets.begin(), targets.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return {Vocab({src.begin(), src.end()}), Vocab(targets)};
}

}  // namespace stemmaplace
