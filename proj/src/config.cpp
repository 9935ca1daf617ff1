#include "stemmaplace/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorKind::ConfigError, std::string(key) + ": not a number: '" + std::string(value) + "'");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::ConfigError, std::string(key) + ": not a number: '" + std::string(value) + "'");
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error(ErrorKind::ConfigError, std::string(key) + ": not a boolean: '" + std::string(value) + "'");
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const std::string k(key);
  const std::string v = trim(value);
  if (k == "collation") collation = v;
  else if (k == "stemma") stemma = v;
  else if (k == "out_dir") out_dir = v;
  else if (k == "lexicon") lexicon = v;
  else if (k == "root_text") root_text = v;
  else if (k == "confusion") confusion = v;
  else if (k == "archetype") archetype = v;
  else if (k == "diff_type") encoding.diff_type = parse_diff_type(v);
  else if (k == "input_type") encoding.input_type = parse_input_type(v);
  else if (k == "embed_dim") hp.embed_dim = parse_number<int>(k, v);
  else if (k == "hidden_dim") hp.hidden_dim = parse_number<int>(k, v);
  else if (k == "layers") hp.layers = parse_number<int>(k, v);
  else if (k == "dropout") hp.dropout = parse_real(k, v);
  else if (k == "batch_size") hp.batch_size = parse_number<int>(k, v);
  else if (k == "train_steps") hp.train_steps = parse_number<int>(k, v);
  else if (k == "valid_size") hp.valid_size = parse_number<int>(k, v);
  else if (k == "optimizer") {
    if (v == "adam") hp.optimizer = OptimizerKind::Adam;
    else if (v == "sgd") hp.optimizer = OptimizerKind::Sgd;
    else throw Error(ErrorKind::ConfigError, "optimizer must be adam or sgd");
  } else if (k == "learning_rate") hp.learning_rate = parse_real(k, v);
  else if (k == "clip_norm") hp.clip_norm = parse_real(k, v);
  else if (k == "param_init") hp.param_init = parse_real(k, v);
  else if (k == "checkpoint_every") hp.checkpoint_every = parse_number<int>(k, v);
  else if (k == "max_decode_len") hp.max_decode_len = parse_number<int>(k, v);
  else if (k == "threads") hp.threads = parse_number<int>(k, v);
  else if (k == "sim_nodes") sim_nodes = parse_number<int>(k, v);
  else if (k == "sim_max_children") sim_max_children = parse_number<int>(k, v);
  else if (k == "error_rate") error_rate = parse_real(k, v);
  else if (k == "within_class_ratio") within_class_ratio = parse_real(k, v);
  else if (k == "correction") correction = parse_bool(k, v);
  else if (k == "baseline_min") baseline_min = parse_number<int>(k, v);
  else if (k == "baseline_max") baseline_max = parse_number<int>(k, v);
  else if (k == "baseline_iterations") baseline_iterations = parse_number<std::size_t>(k, v);
  else if (k == "seed") {
    seed = parse_number<std::uint64_t>(k, v);
    hp.seed = seed;
  } else throw Error(ErrorKind::ConfigError, "unknown key '" + k + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"collation", collation.string()},
          {"stemma", stemma.string()},
          {"out_dir", out_dir.string()},
          {"lexicon", lexicon.string()},
          {"root_text", root_text.string()},
          {"confusion", confusion.string()},
          {"archetype", archetype},
          {"diff_type", std::string(to_string(encoding.diff_type))},
          {"input_type", std::string(to_string(encoding.input_type))},
          {"embed_dim", hp.embed_dim},
          {"hidden_dim", hp.hidden_dim},
          {"layers", hp.layers},
          {"dropout", hp.dropout},
          {"batch_size", hp.batch_size},
          {"train_steps", hp.train_steps},
          {"valid_size", hp.valid_size},
          {"optimizer", hp.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
          {"learning_rate", hp.learning_rate},
          {"clip_norm", hp.clip_norm},
          {"param_init", hp.param_init},
          {"checkpoint_every", hp.checkpoint_every},
          {"max_decode_len", hp.max_decode_len},
          {"threads", hp.threads},
          {"sim_nodes", sim_nodes},
          {"sim_max_children", sim_max_children},
          {"error_rate", error_rate},
          {"within_class_ratio", within_class_ratio},
          {"correction", correction},
          {"baseline_min", baseline_min},
          {"baseline_max", baseline_max},
          {"baseline_iterations", baseline_iterations},
          {"seed", seed}};
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config(buf.str());
  // Relative data paths resolve against the config file's directory.
  const auto base = path.parent_path();
  for (auto* p : {&cfg.collation, &cfg.stemma, &cfg.lexicon, &cfg.root_text, &cfg.confusion})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  // The default out_dir stays relative to the working directory; one named in
  // the file follows the data paths.
  static const std::regex out_key(R"(^[ \t]*out_dir[ \t]*=)", std::regex::multiline);
  if (std::regex_search(buf.str(), out_key) && cfg.out_dir.is_relative()) cfg.out_dir = base / cfg.out_dir;
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "override '" + o + "' is not key=value");
    cfg.set(trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
  }
  if (const char* env = std::getenv("STEMMAPLACE_OUT_DIR"); env && *env) cfg.out_dir = env;
}

}  // namespace stemmaplace
