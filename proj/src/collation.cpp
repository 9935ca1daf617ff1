#include "stemmaplace/collation.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(trim(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cells;
}

bool is_letter_cell(const std::string& cell) {
  return cell == kGap || (cell.size() == 1 && cell[0] >= 'A' && cell[0] <= 'Z');
}

}  // namespace

std::size_t Collation::column_of(std::string_view witness) const {
  const auto it = std::find(witnesses.begin(), witnesses.end(), witness);
  if (it == witnesses.end()) throw Error(ErrorKind::UnknownWitness, std::string(witness));
  return static_cast<std::size_t>(it - witnesses.begin());
}

bool Collation::has_witness(std::string_view witness) const {
  return std::find(witnesses.begin(), witnesses.end(), witness) != witnesses.end();
}

void validate(const Collation& c) {
  if (c.witnesses.size() < 2 || c.rows.empty())
    throw Error(ErrorKind::EmptyCollation, "need at least 2 witnesses and 1 row");
  std::set<std::string> ids;
  for (const auto& w : c.witnesses) {
    if (w.empty()) throw Error(ErrorKind::EmptyCollation, "empty witness id");
    if (!ids.insert(w).second) throw Error(ErrorKind::DuplicateWitness, w);
  }
  for (std::size_t r = 0; r < c.rows.size(); ++r)
    if (c.rows[r].size() != c.witnesses.size())
      throw Error(ErrorKind::RaggedRow, "row " + std::to_string(r) + " has " +
                                            std::to_string(c.rows[r].size()) + " cells, expected " +
                                            std::to_string(c.witnesses.size()));
}

Collation load_collation(std::string_view tsv_text) {
  Collation c;
  std::istringstream in{std::string(tsv_text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      if (trim(line).empty()) continue;
      c.witnesses = split_tabs(line);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != c.witnesses.size())
      throw Error(ErrorKind::RaggedRow, "line " + std::to_string(line_no) + " has " +
                                            std::to_string(cells.size()) + " cells, expected " +
                                            std::to_string(c.witnesses.size()));
    c.rows.push_back(std::move(cells));
  }
  validate(c);
  return c;
}

std::string to_tsv(const Collation& c) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += '\t';
      out += cells[i];
    }
    out += '\n';
  };
  emit(c.witnesses);
  for (const auto& row : c.rows) emit(row);
  return out;
}

bool is_lettered(const Collation& c) {
  for (const auto& row : c.rows)
    for (const auto& cell : row)
      if (!is_letter_cell(cell)) return false;
  return true;
}

LetterCollation LetterCollation::from_lettered(Collation table) {
  validate(table);
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (const auto& cell : table.rows[r])
      if (!is_letter_cell(cell))
        throw Error(ErrorKind::NotLettered, "row " + std::to_string(r) + " cell '" + cell + "'");
  return LetterCollation(std::move(table));
}

std::vector<std::size_t> places_of_variation(const Collation& c) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < c.rows.size(); ++r) {
    const auto& row = c.rows[r];
    if (std::any_of(row.begin(), row.end(), [&](const std::string& cell) { return cell != row.front(); }))
      out.push_back(r);
  }
  return out;
}

LetterCollation recode_letters(const Collation& c, const std::optional<std::string>& archetype) {
  validate(c);
  std::optional<std::size_t> arch_col;
  if (archetype) {
    if (!c.has_witness(*archetype)) throw Error(ErrorKind::UnknownArchetype, *archetype);
    arch_col = c.column_of(*archetype);
  }

  Collation out{c.witnesses, {}};
  out.rows.reserve(c.rows.size());
  for (std::size_t r = 0; r < c.rows.size(); ++r) {
    const auto& row = c.rows[r];
    // Distinct non-gap readings in first-occurrence order with counts.
    std::vector<std::string> distinct;
    std::unordered_map<std::string, std::size_t> count;
    for (const auto& cell : row) {
      if (cell == kGap) continue;
      if (count[cell]++ == 0) distinct.push_back(cell);
    }
    if (distinct.size() > 26)
      throw Error(ErrorKind::TooManyVariants,
                  "row " + std::to_string(r) + " has " + std::to_string(distinct.size()) + " readings");

    std::stable_sort(distinct.begin(), distinct.end(),
                     [&](const std::string& a, const std::string& b) { return count[a] > count[b]; });
    if (arch_col && row[*arch_col] != kGap) {
      const auto it = std::find(distinct.begin(), distinct.end(), row[*arch_col]);
      std::rotate(distinct.begin(), it, it + 1);
    }
    std::unordered_map<std::string, std::string> letter;
    for (std::size_t k = 0; k < distinct.size(); ++k) letter[distinct[k]] = std::string(1, static_cast<char>('A' + k));

    std::vector<std::string> lettered;
    lettered.reserve(row.size());
    for (const auto& cell : row) lettered.push_back(cell == kGap ? std::string(kGap) : letter.at(cell));
    out.rows.push_back(std::move(lettered));
  }
  return LetterCollation(std::move(out));
}

}  // namespace stemmaplace
