#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stemmaplace/pairgen.hpp"
#include "stemmaplace/seq2seq.hpp"

namespace stemmaplace {

// One run's settings. Read from a "key = value" file ('#' comments), then
// overridden by command-line "key=value" pairs and STEMMAPLACE_OUT_DIR.
struct ExperimentConfig {
  // paths
  std::filesystem::path collation;
  std::filesystem::path stemma;
  std::filesystem::path out_dir = "run";
  std::filesystem::path lexicon;
  std::filesystem::path root_text;
  std::filesystem::path confusion;
  // "root" letters the stemma root's reading as A, "none" uses frequency
  // order only, anything else names a witness.
  std::string archetype = "root";

  EncodingConfig encoding;
  HyperParams hp;

  // simulation
  int sim_nodes = 21;
  int sim_max_children = 3;
  double error_rate = 0.01;
  double within_class_ratio = 0.9;
  bool correction = true;

  // baseline; a zero range means "use the training target range"
  int baseline_min = 0;
  int baseline_max = 0;
  std::size_t baseline_iterations = 100000;

  std::uint64_t seed = 1;

  void set(std::string_view key, std::string_view value);  // throws ConfigError
  nlohmann::json to_json() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "key=value" overrides and the STEMMAPLACE_OUT_DIR environment variable.
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides);

}  // namespace stemmaplace
