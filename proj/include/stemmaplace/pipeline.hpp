#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stemmaplace/config.hpp"
#include "stemmaplace/evaluation.hpp"
#include "stemmaplace/placement.hpp"

namespace stemmaplace {

// Run directory layout under cfg.out_dir:
//   stemma.tsv collation.tsv provenance.json          (simulate)
//   leaves/<leaf>/{train,valid,test}.{src,tgt,pairs}  (prepare)
//   leaves/<leaf>/model.bin training_log.csv         (train)
//   leaves/<leaf>/predictions.tsv                    (predict)
//   placement.json eval.json eval.txt baseline.json  (place/eval/baseline)
// Every command also writes <command>_manifest.json.

std::filesystem::path leaf_dir(const ExperimentConfig& cfg, const std::string& leaf);
// Leaf directories written by prepare, sorted.
std::vector<std::filesystem::path> leaf_dirs(const ExperimentConfig& cfg);

void cmd_simulate(const ExperimentConfig& cfg);

// `leaf` empty means all leaves. Returns the prepared leaf directories.
std::vector<std::filesystem::path> cmd_prepare(const ExperimentConfig& cfg, const std::optional<std::string>& leaf);

void cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& dir);

// Writes predictions.tsv; `oracle` reads true distances instead of a model.
void cmd_predict(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool oracle = false);

std::vector<PlacementResult> cmd_place(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& dirs);

EstimateReport cmd_eval(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& dirs);

BaselineReport cmd_baseline(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& dirs);

// prepare (all leaves) -> train -> predict -> place -> eval -> baseline.
void cmd_reproduce(const ExperimentConfig& cfg, bool oracle = false);

struct Prediction {
  std::string query;
  std::string other;
  int d_hat = 0;
  int truth = 0;
  std::vector<std::string> raw;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& dir);

}  // namespace stemmaplace
