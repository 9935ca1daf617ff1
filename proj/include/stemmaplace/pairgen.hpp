#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stemmaplace/collation.hpp"
#include "stemmaplace/stemma.hpp"

namespace stemmaplace {

enum class DiffType { Binary, VariantsSorted, VariantsUnsorted, Words };
enum class InputType { AllPlaces, VariationPlaces };

std::string_view to_string(DiffType t);
std::string_view to_string(InputType t);
DiffType parse_diff_type(std::string_view s);    // throws ConfigError
InputType parse_input_type(std::string_view s);  // throws ConfigError

struct EncodingConfig {
  DiffType diff_type = DiffType::VariantsSorted;
  InputType input_type = InputType::AllPlaces;
};

inline constexpr std::string_view kSameToken = "SAME";
inline constexpr std::string_view kDiffToken = "DIFF";

// One witness pair: source tokens (one per selected row) and the tree
// distance as a string token. `a < b` lexicographically.
struct PairInstance {
  std::string a;
  std::string b;
  std::vector<std::string> source;
  std::string target;

  bool involves(std::string_view w) const { return a == w || b == w; }
  int distance() const { return std::stoi(target); }
};

// Text sources for encoding. Variant letter encodings need `letters`; the
// word encoding needs `words`; binary works from either.
struct EncodingInput {
  const Collation* words = nullptr;
  const LetterCollation* letters = nullptr;
};

// Rows that the input type selects (all rows, or places of variation of the
// table used for encoding).
std::vector<std::size_t> selected_rows(const EncodingInput& in, const EncodingConfig& cfg);

std::vector<std::string> encode_pair(const EncodingInput& in, std::string_view a, std::string_view b,
                                     const EncodingConfig& cfg);
std::vector<std::string> encode_pair(const EncodingInput& in, std::string_view a, std::string_view b,
                                     const EncodingConfig& cfg, const std::vector<std::size_t>& rows);

// One instance per unordered pair of stemma nodes, in canonical order.
std::vector<PairInstance> generate_instances(const EncodingInput& in, const Stemma& stemma,
                                             const EncodingConfig& cfg);

struct HoldoutSplit {
  std::string held_leaf;
  std::vector<PairInstance> train;
  std::vector<PairInstance> valid;
  std::vector<PairInstance> test;
  std::uint64_t seed = 0;
};

HoldoutSplit holdout_split(const std::vector<PairInstance>& instances, const Stemma& stemma,
                           std::string_view held_leaf, std::size_t valid_size, std::uint64_t seed);

// <split>.src / <split>.tgt (space-separated tokens) and <split>.pairs
// ("a<TAB>b") for train, valid and test.
void write_split_files(const HoldoutSplit& split, const std::filesystem::path& dir);
std::vector<PairInstance> read_instances(const std::filesystem::path& dir, std::string_view split_name);

}  // namespace stemmaplace
