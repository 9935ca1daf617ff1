#include "stemmaplace/pairgen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "stemmaplace/error.hpp"
#include "stemmaplace/rng.hpp"

namespace stemmaplace {

namespace {

const Collation& encoding_table(const EncodingInput& in, DiffType t) {
  switch (t) {
    case DiffType::Words:
      if (!in.words) throw Error(ErrorKind::NotLettered, "word encoding needs the raw collation");
      return *in.words;
    case DiffType::VariantsSorted:
    case DiffType::VariantsUnsorted:
      if (!in.letters) throw Error(ErrorKind::NotLettered, "variant encoding needs a letter collation");
      return in.letters->table();
    case DiffType::Binary:
      break;
  }
  if (in.letters) return in.letters->table();
  if (in.words) return *in.words;
  throw Error(ErrorKind::EmptyCollation, "no collation supplied");
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string_view to_string(DiffType t) {
  switch (t) {
    case DiffType::Binary: return "binary";
    case DiffType::VariantsSorted: return "variants_sorted";
    case DiffType::VariantsUnsorted: return "variants_unsorted";
    case DiffType::Words: return "words";
  }
  return "?";
}

std::string_view to_string(InputType t) {
  return t == InputType::AllPlaces ? "all_places" : "variation_places";
}

DiffType parse_diff_type(std::string_view s) {
  for (auto t : {DiffType::Binary, DiffType::VariantsSorted, DiffType::VariantsUnsorted, DiffType::Words})
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::ConfigError, "unknown diff_type '" + std::string(s) + "'");
}

InputType parse_input_type(std::string_view s) {
  for (auto t : {InputType::AllPlaces, InputType::VariationPlaces})
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::ConfigError, "unknown input_type '" + std::string(s) + "'");
}

std::vector<std::size_t> selected_rows(const EncodingInput& in, const EncodingConfig& cfg) {
  const auto& table = encoding_table(in, cfg.diff_type);
  if (cfg.input_type == InputType::VariationPlaces) return places_of_variation(table);
  std::vector<std::size_t> rows(table.rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  return rows;
}

std::vector<std::string> encode_pair(const EncodingInput& in, std::string_view a, std::string_view b,
                                     const EncodingConfig& cfg) {
  return encode_pair(in, a, b, cfg, selected_rows(in, cfg));
}

std::vector<std::string> encode_pair(const EncodingInput& in, std::string_view a, std::string_view b,
                                     const EncodingConfig& cfg, const std::vector<std::size_t>& rows) {
  const auto& table = encoding_table(in, cfg.diff_type);
  const auto ca = table.column_of(a);
  const auto cb = table.column_of(b);
  std::vector<std::string> tokens;
  tokens.reserve(rows.size());
  for (auto r : rows) {
    const auto& x = table.rows.at(r)[ca];
    const auto& y = table.rows.at(r)[cb];
    switch (cfg.diff_type) {
      case DiffType::Binary:
        tokens.emplace_back(x == y ? kSameToken : kDiffToken);
        break;
      case DiffType::VariantsSorted:
        tokens.push_back(x <= y ? x + ":" + y : y + ":" + x);
        break;
      case DiffType::VariantsUnsorted:
      case DiffType::Words:
        tokens.push_back(x + ":" + y);
        break;
    }
  }
  return tokens;
}

std::vector<PairInstance> generate_instances(const EncodingInput& in, const Stemma& stemma,
                                             const EncodingConfig& cfg) {
  const auto& table = encoding_table(in, cfg.diff_type);
  for (const auto& node : stemma.nodes())
    if (!table.has_witness(node)) throw Error(ErrorKind::MissingWitnessColumn, node);
  const auto rows = selected_rows(in, cfg);
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "no rows selected for " + std::string(to_string(cfg.input_type)));

  const DistanceMatrix dist(stemma);
  const auto& ids = stemma.nodes();  // sorted, so (i < j) is canonical order
  std::vector<PairInstance> out;
  out.reserve(ids.size() * (ids.size() - 1) / 2);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      out.push_back({ids[i], ids[j], encode_pair(in, ids[i], ids[j], cfg, rows), std::to_string(dist.at(i, j))});
  return out;
}

HoldoutSplit holdout_split(const std::vector<PairInstance>& instances, const Stemma& stemma,
                           std::string_view held_leaf, std::size_t valid_size, std::uint64_t seed) {
  if (!stemma.is_leaf(held_leaf)) throw Error(ErrorKind::NotALeaf, std::string(held_leaf));
  HoldoutSplit split;
  split.held_leaf = std::string(held_leaf);
  split.seed = seed;
  std::vector<PairInstance> rest;
  for (const auto& inst : instances) (inst.involves(held_leaf) ? split.test : rest).push_back(inst);
  if (valid_size == 0 || valid_size >= rest.size())
    throw Error(ErrorKind::ValidTooLarge, "valid_size " + std::to_string(valid_size) + " with " +
                                              std::to_string(rest.size()) + " remaining instances");

  // Partial Fisher-Yates over indices; the chosen indices keep canonical order.
  std::vector<std::size_t> idx(rest.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < valid_size; ++i) std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  std::vector<bool> is_valid(rest.size(), false);
  for (std::size_t i = 0; i < valid_size; ++i) is_valid[idx[i]] = true;
  for (std::size_t i = 0; i < rest.size(); ++i) (is_valid[i] ? split.valid : split.train).push_back(rest[i]);
  return split;
}

void write_split_files(const HoldoutSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](std::string_view name, const std::vector<PairInstance>& items) {
    const auto base = dir / std::string(name);
    std::ofstream src(base.string() + ".src"), tgt(base.string() + ".tgt"), pairs(base.string() + ".pairs");
    if (!src || !tgt || !pairs) throw Error(ErrorKind::IoError, "cannot write " + base.string() + ".*");
    for (const auto& inst : items) {
      src << join_tokens(inst.source) << '\n';
      tgt << inst.target << '\n';
      pairs << inst.a << '\t' << inst.b << '\n';
    }
  };
  write("train", split.train);
  write("valid", split.valid);
  write("test", split.test);
}

std::vector<PairInstance> read_instances(const std::filesystem::path& dir, std::string_view split_name) {
  const auto base = (dir / std::string(split_name)).string();
  const auto src = read_lines(base + ".src");
  const auto tgt = read_lines(base + ".tgt");
  std::vector<std::string> pairs;
  if (std::filesystem::exists(base + ".pairs")) pairs = read_lines(base + ".pairs");
  if (src.size() != tgt.size() || (!pairs.empty() && pairs.size() != src.size()))
    throw Error(ErrorKind::LengthMismatch, base + ".{src,tgt,pairs} line counts differ");
  std::vector<PairInstance> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    PairInstance inst;
    if (!pairs.empty()) {
      const auto tab = pairs[i].find('\t');
      if (tab == std::string::npos) throw Error(ErrorKind::ParseError, base + ".pairs line " + std::to_string(i + 1));
      inst.a = pairs[i].substr(0, tab);
      inst.b = pairs[i].substr(tab + 1);
    }
    inst.source = split_ws(src[i]);
    const auto t = split_ws(tgt[i]);
    if (t.empty()) throw Error(ErrorKind::ParseError, base + ".tgt line " + std::to_string(i + 1) + " is empty");
    inst.target = t.front();
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace stemmaplace
