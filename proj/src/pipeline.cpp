#include "stemmaplace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "stemmaplace/collation.hpp"
#include "stemmaplace/error.hpp"
#include "stemmaplace/estimator.hpp"
#include "stemmaplace/pairgen.hpp"
#include "stemmaplace/rng.hpp"
#include "stemmaplace/scribesim.hpp"
#include "stemmaplace/stemma.hpp"

namespace stemmaplace {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "stemmaplace 1.0.0";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, p.string() + ": " + e.what());
  }
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    nlohmann::json extra, const Timer& timer) {
  extra["command"] = command;
  extra["version"] = kVersion;
  extra["seed"] = cfg.seed;
  extra["config"] = cfg.to_json();
  extra["timings"] = {{"elapsed_seconds", timer.seconds()}};
  write_file(dir / (command + "_manifest.json"), extra.dump(2) + "\n");
}

Stemma load_stemma_file(const ExperimentConfig& cfg) {
  if (cfg.stemma.empty()) throw Error(ErrorKind::ConfigError, "no stemma path configured");
  return load_stemma(read_file(cfg.stemma));
}

Collation load_collation_file(const ExperimentConfig& cfg) {
  if (cfg.collation.empty()) throw Error(ErrorKind::ConfigError, "no collation path configured");
  return load_collation(read_file(cfg.collation));
}

std::string safe_name(const std::string& id) {
  std::string out = id;
  for (auto& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::string leaf_of(const fs::path& dir) { return read_json(dir / "prepare_manifest.json").at("leaf"); }

std::vector<int> train_target_range(const std::vector<fs::path>& dirs) {
  int lo = 0, hi = 0;
  for (const auto& d : dirs)
    for (const auto& inst : read_instances(d, "train")) {
      const int v = inst.distance();
      lo = lo == 0 ? v : std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

}  // namespace

fs::path leaf_dir(const ExperimentConfig& cfg, const std::string& leaf) {
  return cfg.out_dir / "leaves" / safe_name(leaf);
}

std::vector<fs::path> leaf_dirs(const ExperimentConfig& cfg) {
  std::vector<fs::path> out;
  const auto root = cfg.out_dir / "leaves";
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "prepare_manifest.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_simulate(const ExperimentConfig& cfg) {
  Timer timer;
  ScribeConfig scribe;
  scribe.error_rate = cfg.error_rate;
  scribe.confusion = cfg.confusion.empty()
                         ? ConfusionMatrix::uniform_within_class(cfg.error_rate, cfg.within_class_ratio)
                         : ConfusionMatrix::from_csv(read_file(cfg.confusion));
  scribe.correction_enabled = cfg.correction;
  if (!cfg.lexicon.empty()) scribe.lexicon = Lexicon::load(read_file(cfg.lexicon));
  scribe.seed = derive_seed(cfg.seed, 2);
  if (cfg.root_text.empty()) throw Error(ErrorKind::ConfigError, "no root_text configured");
  const auto words = split_words(read_file(cfg.root_text));
  if (scribe.correction_enabled && scribe.lexicon.empty())
    scribe.lexicon = Lexicon::from_words(words);

  // A configured stemma fixes the tree; otherwise one is generated.
  const auto stemma = cfg.stemma.empty() ? generate_stemma(cfg.sim_nodes, cfg.sim_max_children, derive_seed(cfg.seed, 3))
                                         : load_stemma_file(cfg);
  const auto t = simulate_tradition(stemma, words, scribe);
  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir / "stemma.tsv", stemma.to_edge_list());
  write_file(cfg.out_dir / "stemma.nwk", stemma.to_newick());
  write_file(cfg.out_dir / "collation.tsv", to_tsv(t.collation));
  write_file(cfg.out_dir / "provenance.json", provenance_json(t).dump(1) + "\n");
  write_manifest(cfg.out_dir, "simulate", cfg,
                 {{"nodes", stemma.size()},
                  {"leaves", stemma.leaves().size()},
                  {"rows", t.collation.rows.size()},
                  {"places_of_variation", places_of_variation(t.collation).size()}},
                 timer);
}

std::vector<fs::path> cmd_prepare(const ExperimentConfig& cfg, const std::optional<std::string>& leaf) {
  Timer timer;
  const auto stemma = load_stemma_file(cfg);
  const auto words = load_collation_file(cfg);
  for (const auto& n : stemma.nodes())
    if (!words.has_witness(n)) throw Error(ErrorKind::MissingWitnessColumn, n);

  std::optional<LetterCollation> letters;
  const bool variants = cfg.encoding.diff_type == DiffType::VariantsSorted ||
                        cfg.encoding.diff_type == DiffType::VariantsUnsorted;
  if (is_lettered(words)) {
    letters = LetterCollation::from_lettered(words);
  } else if (variants) {
    std::optional<std::string> arch;
    if (cfg.archetype == "root") arch = stemma.root();
    else if (cfg.archetype != "none") arch = cfg.archetype;
    letters = recode_letters(words, arch);
  }
  const EncodingInput input{&words, letters ? &*letters : nullptr};
  const auto instances = generate_instances(input, stemma, cfg.encoding);

  std::vector<std::string> targets;
  if (leaf) {
    if (!stemma.is_leaf(*leaf)) throw Error(ErrorKind::NotALeaf, *leaf);
    targets.push_back(*leaf);
  } else {
    targets = stemma.leaves();
  }

  std::vector<fs::path> dirs;
  for (const auto& q : targets) {
    const auto split = holdout_split(instances, stemma, q, static_cast<std::size_t>(cfg.hp.valid_size),
                                     derive_seed(cfg.seed, fnv1a(q)));
    const auto dir = leaf_dir(cfg, q);
    write_split_files(split, dir);
    write_file(dir / "backbone.tsv", stemma.remove_leaf(q).to_edge_list());
    write_manifest(dir, "prepare", cfg,
                   {{"leaf", q},
                    {"true_parent", *stemma.parent(q)},
                    {"split_seed", split.seed},
                    {"source_length", instances.front().source.size()},
                    {"counts", {{"train", split.train.size()}, {"valid", split.valid.size()}, {"test", split.test.size()}}}},
                   timer);
    dirs.push_back(dir);
  }
  write_manifest(cfg.out_dir, "prepare", cfg,
                 {{"leaves", targets},
                  {"instances", instances.size()},
                  {"diff_type", to_string(cfg.encoding.diff_type)},
                  {"input_type", to_string(cfg.encoding.input_type)}},
                 timer);
  return dirs;
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& dir) {
  Timer timer;
  const auto train_set = read_instances(dir, "train");
  const auto valid_set = read_instances(dir, "valid");
  HyperParams hp = cfg.hp;
  hp.seed = cfg.seed;
  auto result = train(train_set, valid_set, hp);
  result.model.save(dir / "model.bin");
  write_file(dir / "training_log.csv", result.log.to_csv());
  nlohmann::json extra = {{"leaf", leaf_of(dir)},
                          {"final_loss", result.log.final_loss},
                          {"threads", hp.threads},
                          {"parameters", result.model.params().parameter_count()},
                          {"train_instances", train_set.size()},
                          {"valid_instances", valid_set.size()}};
  if (!result.log.entries.empty()) extra["final_valid_acc"] = result.log.entries.back().valid_acc;
  write_manifest(dir, "train", cfg, extra, timer);
}

void cmd_predict(const ExperimentConfig& cfg, const fs::path& dir, bool oracle) {
  Timer timer;
  const auto leaf = leaf_of(dir);
  const auto test = read_instances(dir, "test");
  std::unique_ptr<DistanceEstimator> est;
  if (oracle) {
    est = oracle_estimator(load_stemma_file(cfg));
  } else {
    auto model = std::make_shared<const Seq2SeqModel>(Seq2SeqModel::load(dir / "model.bin"));
    est = std::make_unique<Seq2SeqEstimator>(std::move(model));
  }
  const auto estimates = estimate_all(*est, test, leaf);
  std::string out = "query\tother\td_hat\ttruth\traw\n";
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    out += e.query + "\t" + e.other + "\t" + std::to_string(e.d_hat) + "\t" + test[i].target + "\t" +
           join(e.raw_output, ' ') + "\n";
  }
  write_file(dir / "predictions.tsv", out);
  write_manifest(dir, "predict", cfg, {{"leaf", leaf}, {"oracle", oracle}, {"estimates", estimates.size()}}, timer);
}

std::vector<Prediction> read_predictions(const fs::path& dir) {
  std::istringstream in(read_file(dir / "predictions.tsv"));
  std::string line;
  std::getline(in, line);
  std::vector<Prediction> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cells.size() != 5) throw Error(ErrorKind::ParseError, (dir / "predictions.tsv").string() + ": bad line");
    Prediction p{cells[0], cells[1], std::stoi(cells[2]), std::stoi(cells[3]), split_words(cells[4])};
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PlacementResult> cmd_place(const ExperimentConfig& cfg, const std::vector<fs::path>& dirs) {
  Timer timer;
  const auto stemma = load_stemma_file(cfg);
  std::vector<PlacementResult> results;
  for (const auto& dir : dirs) {
    const auto leaf = leaf_of(dir);
    const auto backbone = stemma.remove_leaf(leaf);
    std::vector<DistanceEstimate> estimates;
    for (auto& p : read_predictions(dir)) estimates.push_back({p.query, p.other, p.d_hat, p.raw});
    auto r = place(backbone, estimates);
    r.query = leaf;
    attach_truth(r, backbone, *stemma.parent(leaf));
    results.push_back(std::move(r));
  }
  write_file(cfg.out_dir / "placement.json", placement_report(results).dump(2) + "\n");
  write_manifest(cfg.out_dir, "place", cfg, {{"leaves", results.size()}, {"hitrate", hitrate(results)}}, timer);
  return results;
}

EstimateReport cmd_eval(const ExperimentConfig& cfg, const std::vector<fs::path>& dirs) {
  Timer timer;
  std::vector<int> est, truth;
  for (const auto& dir : dirs)
    for (const auto& p : read_predictions(dir)) {
      est.push_back(p.d_hat);
      truth.push_back(p.truth);
    }
  const auto report = score_estimates(est, truth);
  nlohmann::json j = {{"estimates", to_json(report)}};
  double hr = 0.0, credit = 0.0, radius = 0.0;
  std::size_t leaves = 0;
  if (fs::exists(cfg.out_dir / "placement.json")) {
    const auto pj = read_json(cfg.out_dir / "placement.json");
    hr = pj.at("hitrate");
    credit = pj.at("hit_credit_total");
    radius = pj.at("mean_radius");
    leaves = pj.at("leaf_count");
    j["placement"] = {{"hitrate", hr}, {"hit_credit_total", credit}, {"mean_radius", radius}, {"leaves", leaves}};
  }
  std::optional<BaselineReport> base;
  if (fs::exists(cfg.out_dir / "baseline.json")) {
    const auto bj = read_json(cfg.out_dir / "baseline.json");
    BaselineReport b;
    b.iterations = bj.at("iterations");
    b.mean_correct = bj.at("mean_correct");
    b.mean_ratio = bj.at("mean_ratio");
    b.mean_avg_deviation = bj.at("mean_avg_deviation");
    b.mean_sd = bj.at("mean_sd");
    b.max_dist_overall = bj.at("max_dist_overall");
    b.max_correct = bj.at("max_correct");
    b.observed_correct = bj.at("observed_correct");
    b.empirical_p = bj.at("empirical_p");
    base = b;
  }
  write_file(cfg.out_dir / "eval.json", j.dump(2) + "\n");
  write_file(cfg.out_dir / "eval.txt",
             format_results_table(report, hr, credit, leaves, radius, base ? &*base : nullptr));
  write_manifest(cfg.out_dir, "eval", cfg, {{"estimates", report.n}}, timer);
  return report;
}

BaselineReport cmd_baseline(const ExperimentConfig& cfg, const std::vector<fs::path>& dirs) {
  Timer timer;
  std::vector<int> truths;
  std::size_t observed = 0;
  for (const auto& dir : dirs)
    for (const auto& p : read_predictions(dir)) {
      truths.push_back(p.truth);
      observed += p.d_hat == p.truth;
    }
  int lo = cfg.baseline_min, hi = cfg.baseline_max;
  if (lo == 0 && hi == 0) {
    const auto range = train_target_range(dirs);
    lo = range[0];
    hi = range[1];
  }
  const auto report = run_baseline(truths, lo, hi, cfg.baseline_iterations, derive_seed(cfg.seed, 4), observed);
  const auto expected = expected_baseline(truths, lo, hi);
  auto j = to_json(report);
  j["range"] = {lo, hi};
  j["expected"] = {{"ratio", expected.ratio}, {"avg_deviation", expected.avg_deviation}};
  write_file(cfg.out_dir / "baseline.json", j.dump(2) + "\n");
  write_manifest(cfg.out_dir, "baseline", cfg, {{"truths", truths.size()}}, timer);
  return report;
}

void cmd_reproduce(const ExperimentConfig& cfg, bool oracle) {
  const auto dirs = cmd_prepare(cfg, std::nullopt);
  for (const auto& d : dirs) {
    if (!oracle) cmd_train(cfg, d);
    cmd_predict(cfg, d, oracle);
  }
  const auto placed = cmd_place(cfg, dirs);
  const auto base = cmd_baseline(cfg, dirs);
  const auto est = cmd_eval(cfg, dirs);

  double credit = 0.0;
  for (const auto& r : placed) credit += r.hit_credit.value_or(0.0);
  std::ostringstream out;
  out << format_results_table(est, hitrate(placed), credit, placed.size(), mean_radius(placed), &base);
  out << "\nParzival reference (BRNN 512/128, 7000 steps):\n"
      << "  correct predictions    111/240 (0.46)\n"
      << "  average deviation      0.6 (SD: 0.6)\n"
      << "  max dist               3\n"
      << "  hitrate localizations  9.5/12 (0.79)\n"
      << "  average radius         0.23\n"
      << "  random baseline        40/240 (0.17), avg deviation 1.85 (SD: 1.4), max dist 5\n";
  write_file(cfg.out_dir / "report.txt", out.str());
}

}  // namespace stemmaplace
