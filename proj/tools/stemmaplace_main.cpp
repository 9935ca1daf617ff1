#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stemmaplace/config.hpp"
#include "stemmaplace/error.hpp"
#include "stemmaplace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stemmaplace;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "key = value config file");
  cmd->add_option("-s,--set", c.overrides, "override a config key (key=value), repeatable");
}

ExperimentConfig resolve(const Common& c, bool simulating) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  apply_overrides(cfg, c.overrides);
  if (simulating) return cfg;
  // A simulated tradition in the run directory stands in for missing inputs.
  if (cfg.collation.empty() && fs::exists(cfg.out_dir / "collation.tsv")) cfg.collation = cfg.out_dir / "collation.tsv";
  if (cfg.stemma.empty() && fs::exists(cfg.out_dir / "stemma.tsv")) cfg.stemma = cfg.out_dir / "stemma.tsv";
  return cfg;
}

std::vector<fs::path> select_dirs(const ExperimentConfig& cfg, const std::string& leaf) {
  if (!leaf.empty()) {
    const auto dir = leaf_dir(cfg, leaf);
    if (!fs::exists(dir / "prepare_manifest.json"))
      throw Error(ErrorKind::IoError, "leaf '" + leaf + "' has not been prepared under " + cfg.out_dir.string());
    return {dir};
  }
  auto dirs = leaf_dirs(cfg);
  if (dirs.empty()) throw Error(ErrorKind::IoError, "no prepared leaves under " + cfg.out_dir.string());
  return dirs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Witness placement on a stemma from learned pairwise edge distances"};
  app.require_subcommand(1);

  Common common;
  std::string leaf;
  bool all_leaves = false;
  bool oracle = false;

  auto* simulate = app.add_subcommand("simulate", "generate a stemma and copy a root text along it");
  add_common(simulate, common);

  auto* prepare = app.add_subcommand("prepare", "write hold-one-leaf-out splits");
  add_common(prepare, common);
  auto* leaf_opt = prepare->add_option("--leaf", leaf, "leaf to hold back");
  auto* all_opt = prepare->add_flag("--all-leaves", all_leaves, "one split per leaf");
  leaf_opt->excludes(all_opt);

  auto* train_cmd = app.add_subcommand("train", "train the distance estimator for prepared leaves");
  add_common(train_cmd, common);
  train_cmd->add_option("--leaf", leaf, "only this leaf (default: every prepared leaf)");

  auto* predict = app.add_subcommand("predict", "estimate distances from the held-back leaf");
  add_common(predict, common);
  predict->add_option("--leaf", leaf, "only this leaf");
  predict->add_flag("--oracle", oracle, "use true stemma distances instead of the model");

  auto* place_cmd = app.add_subcommand("place", "place held-back leaves from their estimates");
  add_common(place_cmd, common);
  place_cmd->add_option("--leaf", leaf, "only this leaf");
  place_cmd->add_flag("--oracle", oracle, "predict with true distances first");

  auto* eval = app.add_subcommand("eval", "score estimates against true distances");
  add_common(eval, common);
  eval->add_option("--leaf", leaf, "only this leaf");

  auto* baseline = app.add_subcommand("baseline", "random-estimate Monte Carlo baseline");
  add_common(baseline, common);
  baseline->add_option("--leaf", leaf, "only this leaf");

  auto* reproduce = app.add_subcommand("reproduce", "prepare, train, predict, place, eval and baseline");
  add_common(reproduce, common);
  reproduce->add_flag("--oracle", oracle, "skip training and use true distances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config-error exit code; --help still exits 0.
    return app.exit(e) == 0 ? 0 : static_cast<int>(ErrorClass::Config);
  }

  try {
    const auto cfg = resolve(common, simulate->parsed());
    if (simulate->parsed()) {
      cmd_simulate(cfg);
    } else if (prepare->parsed()) {
      if (leaf.empty() && !all_leaves) throw Error(ErrorKind::ConfigError, "prepare needs --leaf or --all-leaves");
      const auto dirs = cmd_prepare(cfg, leaf.empty() ? std::nullopt : std::optional<std::string>(leaf));
      std::cout << "prepared " << dirs.size() << " leaf split(s) under " << (cfg.out_dir / "leaves").string() << "\n";
    } else if (train_cmd->parsed()) {
      for (const auto& d : select_dirs(cfg, leaf)) {
        std::cout << "training " << d.filename().string() << "\n" << std::flush;
        cmd_train(cfg, d);
      }
    } else if (predict->parsed()) {
      for (const auto& d : select_dirs(cfg, leaf)) cmd_predict(cfg, d, oracle);
    } else if (place_cmd->parsed()) {
      const auto dirs = select_dirs(cfg, leaf);
      if (oracle)
        for (const auto& d : dirs) cmd_predict(cfg, d, true);
      const auto results = cmd_place(cfg, dirs);
      std::cout << "hitrate " << hitrate(results) << " mean radius " << mean_radius(results) << "\n";
    } else if (eval->parsed()) {
      cmd_eval(cfg, select_dirs(cfg, leaf));
      std::cout << std::ifstream(cfg.out_dir / "eval.txt").rdbuf();
    } else if (baseline->parsed()) {
      const auto b = cmd_baseline(cfg, select_dirs(cfg, leaf));
      std::cout << "baseline mean ratio " << b.mean_ratio << " empirical p " << b.empirical_p << "\n";
    } else if (reproduce->parsed()) {
      cmd_reproduce(cfg, oracle);
      std::cout << std::ifstream(cfg.out_dir / "report.txt").rdbuf();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(classify(e.kind()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
