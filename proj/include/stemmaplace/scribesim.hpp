#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "stemmaplace/collation.hpp"
#include "stemmaplace/rng.hpp"
#include "stemmaplace/stemma.hpp"

namespace stemmaplace {

enum class CharClass { Vowel, Consonant, Other };

CharClass char_class(char c);

// Row-stochastic miscopy probabilities over a lowercase alphabet.
struct ConfusionMatrix {
  std::string alphabet;
  std::vector<std::vector<double>> p;
  std::vector<CharClass> classes;

  // Diagonal 1 - error_rate; the off-diagonal mass error_rate is spread
  // uniformly, a `within_class_ratio` share over letters of the same class.
  static ConfusionMatrix uniform_within_class(double error_rate, double within_class_ratio,
                                              std::string alphabet = "abcdefghijklmnopqrstuvwxyz");
  // Header ",a,b,..." then one "c,p(c->a),p(c->b),..." line per character.
  static ConfusionMatrix from_csv(std::string_view text);

  // Throws BadConfusionMatrix unless rows sum to 1, diagonals are at least
  // `fidelity` and each row's off-diagonal mass is at least
  // `within_class_ratio` within class.
  void validate(double fidelity, double within_class_ratio) const;

  int index_of(char c) const;  // -1 outside the alphabet
  // Replacement drawn from the off-diagonal part of c's row.
  char substitute(char c, Rng& rng) const;
};

struct Lexicon {
  std::vector<std::string> words;  // sorted, lowercase, unique
  std::unordered_set<std::string> index;

  static Lexicon from_words(const std::vector<std::string>& words);
  // One word per line; blank lines ignored.
  static Lexicon load(std::string_view text);
  bool contains(std::string_view w) const { return index.count(std::string(w)) != 0; }
  bool empty() const { return words.empty(); }
};

struct ScribeConfig {
  double error_rate = 0.01;
  ConfusionMatrix confusion = ConfusionMatrix::uniform_within_class(0.01, 0.9);
  Lexicon lexicon;
  bool correction_enabled = true;
  std::uint64_t seed = 1;

  void validate() const;  // throws BadParams
};

struct CharEdit {
  std::size_t word = 0;
  std::size_t pos = 0;
  char from = 0;
  char to = 0;
};

struct WordCorrection {
  std::size_t word = 0;
  std::string from;
  std::string to;
};

struct CopyRecord {
  std::size_t eligible_chars = 0;  // characters exposed to corruption
  std::size_t corruption_events = 0;
  std::vector<CharEdit> edits;  // events that changed the character
  std::vector<WordCorrection> corrections;
};

// Optimal string alignment distance (adjacent transpositions, no substring
// edited twice).
int damerau_levenshtein(std::string_view a, std::string_view b);

std::vector<std::string> split_words(std::string_view text);

// Copies a word list. Each alphabet character is corrupted with probability
// error_rate; then out-of-lexicon words are replaced by a lexicon word at
// minimal distance (uniform among ties). Throws EmptyText.
std::vector<std::string> copy_text(const std::vector<std::string>& words, const ScribeConfig& cfg, Rng& rng,
                                   CopyRecord* record = nullptr);

// Sequential attachment: node k picks a parent uniformly among earlier nodes
// with fewer than max_children children. Throws BadParams.
Stemma generate_stemma(int n_nodes, int max_children, std::uint64_t seed);

struct EdgeProvenance {
  std::string parent;
  std::string child;
  CopyRecord record;
};

struct SimulatedTradition {
  Stemma stemma;
  std::map<std::string, std::vector<std::string>> texts;
  Collation collation;
  std::vector<EdgeProvenance> provenance;  // in pre-order of the child
};

// Each child's text is copied from its parent with a generator seeded by
// derive_seed(cfg.seed, fnv1a(child id)).
SimulatedTradition simulate_tradition(const Stemma& stemma, const std::vector<std::string>& root_text,
                                      const ScribeConfig& cfg);

nlohmann::json provenance_json(const SimulatedTradition& t);

}  // namespace stemmaplace
