#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stemmaplace {

inline constexpr std::string_view kGap = "-";

// Alignment of witness texts: rows are positions, columns are witnesses.
struct Collation {
  std::vector<std::string> witnesses;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_of(std::string_view witness) const;  // throws UnknownWitness
  bool has_witness(std::string_view witness) const;
};

// A collation whose cells are single letters A-Z or the gap marker. Within a
// row, equal letters mean equal readings.
class LetterCollation {
 public:
  // Accepts an already-lettered collation; throws NotLettered otherwise.
  static LetterCollation from_lettered(Collation table);

  const Collation& table() const { return table_; }
  const std::vector<std::string>& witnesses() const { return table_.witnesses; }
  const std::vector<std::vector<std::string>>& rows() const { return table_.rows; }

 private:
  friend LetterCollation recode_letters(const Collation&, const std::optional<std::string>&);
  explicit LetterCollation(Collation table) : table_(std::move(table)) {}
  Collation table_;
};

// Header line of witness ids, then one tab-separated row per line.
Collation load_collation(std::string_view tsv_text);
std::string to_tsv(const Collation& c);

// Throws RaggedRow / DuplicateWitness / EmptyCollation.
void validate(const Collation& c);

bool is_lettered(const Collation& c);

// Rows where at least two witnesses disagree (the gap counts as a reading).
std::vector<std::size_t> places_of_variation(const Collation& c);

// Per row: the archetype's reading becomes "A" when an archetype is given;
// the other readings are lettered by descending frequency, ties broken by
// first occurrence in column order. Gaps stay "-".
LetterCollation recode_letters(const Collation& c, const std::optional<std::string>& archetype = std::nullopt);

}  // namespace stemmaplace
