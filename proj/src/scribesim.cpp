#include "stemmaplace/scribesim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Alphabetic core of a token such as "rights," -> [0, 6).
std::pair<std::size_t, std::size_t> word_core(const std::string& w) {
  std::size_t a = 0, b = w.size();
  while (a < b && !is_alpha(w[a])) ++a;
  while (b > a && !is_alpha(w[b - 1])) --b;
  return {a, b};
}

}  // namespace

CharClass char_class(char c) {
  const char l = lower(c);
  if (l == 'a' || l == 'e' || l == 'i' || l == 'o' || l == 'u') return CharClass::Vowel;
  if (l >= 'a' && l <= 'z') return CharClass::Consonant;
  return CharClass::Other;
}

ConfusionMatrix ConfusionMatrix::uniform_within_class(double error_rate, double within_class_ratio,
                                                      std::string alphabet) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0) || !(within_class_ratio >= 0.0 && within_class_ratio <= 1.0))
    throw Error(ErrorKind::BadParams, "error_rate and within_class_ratio must lie in [0,1]");
  ConfusionMatrix m;
  m.alphabet = std::move(alphabet);
  const auto n = m.alphabet.size();
  for (char c : m.alphabet) m.classes.push_back(char_class(c));
  m.p.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t same = 0, other = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) (m.classes[j] == m.classes[i] ? same : other)++;
    // A class with no peers (or no outsiders) keeps the whole off-diagonal mass.
    double same_mass = error_rate * within_class_ratio, other_mass = error_rate - same_mass;
    if (same == 0) {
      other_mass = error_rate;
      same_mass = 0.0;
    } else if (other == 0) {
      same_mass = error_rate;
      other_mass = 0.0;
    }
    m.p[i][i] = 1.0 - error_rate;
    if (same == 0 && other == 0) m.p[i][i] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      m.p[i][j] = m.classes[j] == m.classes[i] ? same_mass / static_cast<double>(same)
                                               : other_mass / static_cast<double>(other);
    }
  }
  return m;
}

ConfusionMatrix ConfusionMatrix::from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  ConfusionMatrix m;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_csv(line);
    for (auto& c : cells) c = trim(c);
    if (header.empty()) {
      header = cells;
      if (header.size() < 2) throw Error(ErrorKind::BadConfusionMatrix, "header needs at least one character");
      for (std::size_t k = 1; k < header.size(); ++k) {
        if (header[k].size() != 1) throw Error(ErrorKind::BadConfusionMatrix, "header cell '" + header[k] + "'");
        m.alphabet += lower(header[k][0]);
      }
      continue;
    }
    if (cells.size() != header.size() || cells[0].size() != 1 ||
        lower(cells[0][0]) != m.alphabet[m.p.size() < m.alphabet.size() ? m.p.size() : 0])
      throw Error(ErrorKind::BadConfusionMatrix, "row '" + line + "' does not match the header order");
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      try {
        row.push_back(std::stod(cells[k]));
      } catch (const std::exception&) {
        throw Error(ErrorKind::BadConfusionMatrix, "not a number: '" + cells[k] + "'");
      }
      if (!(row.back() >= 0.0)) throw Error(ErrorKind::BadConfusionMatrix, "negative probability");
    }
    m.p.push_back(std::move(row));
  }
  if (m.p.size() != m.alphabet.size() || m.alphabet.empty())
    throw Error(ErrorKind::BadConfusionMatrix, "expected one row per alphabet character");
  for (char c : m.alphabet) m.classes.push_back(char_class(c));
  m.validate(0.0, 0.0);
  return m;
}

void ConfusionMatrix::validate(double fidelity, double within_class_ratio) const {
  const auto n = alphabet.size();
  if (p.size() != n || classes.size() != n) throw Error(ErrorKind::BadConfusionMatrix, "shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i].size() != n) throw Error(ErrorKind::BadConfusionMatrix, "ragged row");
    double sum = 0.0, off = 0.0, within = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += p[i][j];
      if (j == i) continue;
      off += p[i][j];
      if (classes[j] == classes[i]) within += p[i][j];
    }
    const std::string who = std::string("row '") + alphabet[i] + "'";
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::BadConfusionMatrix, who + " sums to " + std::to_string(sum));
    if (p[i][i] < fidelity - 1e-12) throw Error(ErrorKind::BadConfusionMatrix, who + " diagonal below fidelity");
    if (off > 0.0 && within < within_class_ratio * off - 1e-12)
      throw Error(ErrorKind::BadConfusionMatrix, who + " within-class share below ratio");
  }
}

int ConfusionMatrix::index_of(char c) const {
  const auto pos = alphabet.find(lower(c));
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

char ConfusionMatrix::substitute(char c, Rng& rng) const {
  const int i = index_of(c);
  if (i < 0) return c;
  const auto& row = p[static_cast<std::size_t>(i)];
  double off = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (static_cast<int>(j) != i) off += row[j];
  if (off <= 0.0) return c;
  double u = rng.uniform01() * off;
  char pick = c;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (static_cast<int>(j) == i || row[j] <= 0.0) continue;
    pick = alphabet[j];
    if (u < row[j]) break;
    u -= row[j];
  }
  return is_upper(c) ? upper(pick) : pick;
}

Lexicon Lexicon::from_words(const std::vector<std::string>& words) {
  Lexicon lex;
  for (const auto& w : words) {
    auto l = to_lower(trim(w));
    if (!l.empty() && lex.index.insert(l).second) lex.words.push_back(std::move(l));
  }
  std::sort(lex.words.begin(), lex.words.end());
  return lex;
}

Lexicon Lexicon::load(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) words.push_back(line);
  return from_words(words);
}

void ScribeConfig::validate() const {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw Error(ErrorKind::BadParams, "error_rate outside [0,1]");
  if (correction_enabled && lexicon.empty())
    throw Error(ErrorKind::BadParams, "correction enabled with an empty lexicon");
  confusion.validate(0.0, 0.0);
}

int damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int v = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) v = std::min(v, at(i - 2, j - 2) + 1);
      at(i, j) = v;
    }
  }
  return at(n, m);
}

std::vector<std::string> split_words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<std::string> copy_text(const std::vector<std::string>& words, const ScribeConfig& cfg, Rng& rng,
                                   CopyRecord* record) {
  if (words.empty()) throw Error(ErrorKind::EmptyText, "nothing to copy");
  std::vector<std::string> out = words;
  for (std::size_t w = 0; w < out.size(); ++w) {
    auto& word = out[w];
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (cfg.confusion.index_of(word[k]) < 0) continue;
      if (record) ++record->eligible_chars;
      if (rng.uniform01() >= cfg.error_rate) continue;
      const char to = cfg.confusion.substitute(word[k], rng);
      if (record) {
        ++record->corruption_events;
        if (to != word[k]) record->edits.push_back({w, k, word[k], to});
      }
      word[k] = to;
    }
  }
  if (!cfg.correction_enabled) return out;

  for (std::size_t w = 0; w < out.size(); ++w) {
    auto& word = out[w];
    const auto [a, b] = word_core(word);
    if (a >= b) continue;
    const std::string core = to_lower(std::string_view(word).substr(a, b - a));
    if (cfg.lexicon.contains(core)) continue;
    int best = -1;
    std::vector<const std::string*> ties;
    for (const auto& cand : cfg.lexicon.words) {
      const int gap = std::abs(static_cast<int>(cand.size()) - static_cast<int>(core.size()));
      if (best >= 0 && gap > best) continue;
      const int d = damerau_levenshtein(core, cand);
      if (best < 0 || d < best) {
        best = d;
        ties.clear();
      }
      if (d == best) ties.push_back(&cand);
    }
    std::string repl = *ties[rng.uniform_index(ties.size())];
    if (is_upper(word[a]) && !repl.empty()) repl[0] = upper(repl[0]);
    const std::string before = word;
    word = word.substr(0, a) + repl + word.substr(b);
    if (record) record->corrections.push_back({w, before, word});
  }
  return out;
}

Stemma generate_stemma(int n_nodes, int max_children, std::uint64_t seed) {
  if (n_nodes < 2 || max_children < 1)
    throw Error(ErrorKind::BadParams, "need n_nodes >= 2 and max_children >= 1");
  const auto width = std::to_string(n_nodes - 1).size();
  auto name = [&](int i) {
    auto s = std::to_string(i);
    return "N" + std::string(width - s.size(), '0') + s;
  };
  Rng rng(seed);
  std::vector<int> open{0};  // nodes that can take another child
  std::vector<int> child_count(static_cast<std::size_t>(n_nodes), 0);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n_nodes - 1));
  for (int k = 1; k < n_nodes; ++k) {
    const auto slot = rng.uniform_index(open.size());
    const int parent = open[slot];
    edges.emplace_back(name(parent), name(k));
    if (++child_count[static_cast<std::size_t>(parent)] >= max_children) {
      open[slot] = open.back();
      open.pop_back();
    }
    open.push_back(k);
  }
  return Stemma::from_edges(std::move(edges));
}

SimulatedTradition simulate_tradition(const Stemma& stemma, const std::vector<std::string>& root_text,
                                      const ScribeConfig& cfg) {
  cfg.validate();
  if (root_text.empty()) throw Error(ErrorKind::EmptyText, "root text is empty");
  SimulatedTradition t{stemma, {}, {}, {}};
  std::vector<std::vector<std::string>> texts(stemma.size());
  texts[stemma.root_index()] = root_text;
  for (auto node : stemma.preorder()) {
    for (auto child : stemma.child_indices(node)) {
      Rng rng(derive_seed(cfg.seed, fnv1a(stemma.id(child))));
      EdgeProvenance prov{stemma.id(node), stemma.id(child), {}};
      texts[child] = copy_text(texts[node], cfg, rng, &prov.record);
      t.provenance.push_back(std::move(prov));
    }
  }
  t.collation.witnesses = stemma.nodes();
  t.collation.rows.assign(root_text.size(), std::vector<std::string>(stemma.size()));
  for (std::size_t w = 0; w < stemma.size(); ++w)
    for (std::size_t r = 0; r < root_text.size(); ++r) t.collation.rows[r][w] = texts[w][r];
  for (std::size_t w = 0; w < stemma.size(); ++w) t.texts.emplace(stemma.id(w), std::move(texts[w]));
  return t;
}

nlohmann::json provenance_json(const SimulatedTradition& t) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : t.provenance) {
    nlohmann::json edits = nlohmann::json::array(), corrections = nlohmann::json::array();
    for (const auto& x : e.record.edits)
      edits.push_back({{"word", x.word}, {"pos", x.pos}, {"from", std::string(1, x.from)}, {"to", std::string(1, x.to)}});
    for (const auto& c : e.record.corrections) corrections.push_back({{"word", c.word}, {"from", c.from}, {"to", c.to}});
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"eligible_chars", e.record.eligible_chars},
                     {"corruption_events", e.record.corruption_events},
                     {"edits", edits},
                     {"corrections", corrections}});
  }
  return {{"root", t.stemma.root()}, {"edges", edges}};
}

}  // namespace stemmaplace
