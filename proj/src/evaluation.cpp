#include "stemmaplace/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "stemmaplace/error.hpp"
#include "stemmaplace/rng.hpp"

namespace stemmaplace {

EstimateReport score_estimates(const std::vector<int>& estimates, const std::vector<int>& truths) {
  if (estimates.size() != truths.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(estimates.size()) + " estimates vs " +
                                               std::to_string(truths.size()) + " truths");
  if (estimates.empty()) throw Error(ErrorKind::Empty, "no estimates");
  EstimateReport r;
  r.n = estimates.size();
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const int dev = std::abs(estimates[i] - truths[i]);
    r.correct += dev == 0;
    r.max_dist = std::max(r.max_dist, dev);
    sum += dev;
    sum2 += static_cast<double>(dev) * dev;
  }
  const auto n = static_cast<double>(r.n);
  r.ratio = static_cast<double>(r.correct) / n;
  r.avg_deviation = sum / n;
  r.sd = std::sqrt(std::max(0.0, sum2 / n - r.avg_deviation * r.avg_deviation));
  return r;
}

BaselineReport run_baseline(const std::vector<int>& truths, int d_min, int d_max, std::size_t iterations,
                            std::uint64_t seed, std::size_t observed_correct) {
  if (d_min > d_max) throw Error(ErrorKind::BadRange, std::to_string(d_min) + " > " + std::to_string(d_max));
  if (truths.empty() || iterations == 0) throw Error(ErrorKind::Empty, "baseline needs truths and iterations");
  BaselineReport b;
  b.iterations = iterations;
  b.observed_correct = observed_correct;
  std::size_t at_least = 0;
  double correct_sum = 0.0, ratio_sum = 0.0, dev_sum = 0.0, sd_sum = 0.0;
  std::vector<int> draws(truths.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    Rng rng(derive_seed(seed, it));
    for (auto& d : draws) d = static_cast<int>(rng.uniform_int(d_min, d_max));
    const auto r = score_estimates(draws, truths);
    correct_sum += static_cast<double>(r.correct);
    ratio_sum += r.ratio;
    dev_sum += r.avg_deviation;
    sd_sum += r.sd;
    b.max_dist_overall = std::max(b.max_dist_overall, r.max_dist);
    b.max_correct = std::max(b.max_correct, r.correct);
    at_least += r.correct >= observed_correct;
  }
  const auto n = static_cast<double>(iterations);
  b.mean_correct = correct_sum / n;
  b.mean_ratio = ratio_sum / n;
  b.mean_avg_deviation = dev_sum / n;
  b.mean_sd = sd_sum / n;
  b.empirical_p = static_cast<double>(at_least) / n;
  return b;
}

ExpectedBaseline expected_baseline(const std::vector<int>& truths, int d_min, int d_max) {
  if (d_min > d_max) throw Error(ErrorKind::BadRange, std::to_string(d_min) + " > " + std::to_string(d_max));
  if (truths.empty()) throw Error(ErrorKind::Empty, "no truths");
  const double k = d_max - d_min + 1;
  const double n = static_cast<double>(truths.size());
  ExpectedBaseline e;
  e.ratio = 1.0 / k;
  e.ratio_sd = std::sqrt(e.ratio * (1.0 - e.ratio) / n);
  double mean_sum = 0.0, var_sum = 0.0;
  for (int t : truths) {
    double m = 0.0, m2 = 0.0;
    for (int v = d_min; v <= d_max; ++v) {
      const double dev = std::abs(v - t);
      m += dev / k;
      m2 += dev * dev / k;
    }
    mean_sum += m;
    var_sum += m2 - m * m;
  }
  e.avg_deviation = mean_sum / n;
  e.avg_deviation_sd = std::sqrt(var_sum) / n;
  return e;
}

nlohmann::json to_json(const EstimateReport& r) {
  return {{"n", r.n},
          {"correct", r.correct},
          {"ratio", r.ratio},
          {"avg_deviation", r.avg_deviation},
          {"sd", r.sd},
          {"max_dist", r.max_dist}};
}

nlohmann::json to_json(const BaselineReport& r) {
  return {{"iterations", r.iterations},
          {"mean_correct", r.mean_correct},
          {"mean_ratio", r.mean_ratio},
          {"mean_avg_deviation", r.mean_avg_deviation},
          {"mean_sd", r.mean_sd},
          {"max_dist_overall", r.max_dist_overall},
          {"max_correct", r.max_correct},
          {"observed_correct", r.observed_correct},
          {"empirical_p", r.empirical_p}};
}

std::string format_results_table(const EstimateReport& est, double hitrate, double hit_credit, std::size_t leaves,
                                 double mean_radius, const BaselineReport* baseline) {
  char buf[256];
  std::ostringstream out;
  auto row = [&](const char* feature, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-24s %s\n", feature, value.c_str());
    out << buf;
  };
  auto fmt = [&](const char* f, auto... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    return std::string(buf);
  };
  row("Feature", "Value");
  out << std::string(48, '-') << '\n';
  row("correct predictions", fmt("%zu/%zu (%.2f)", est.correct, est.n, est.ratio));
  row("average deviation", fmt("%.2f (SD: %.2f)", est.avg_deviation, est.sd));
  row("max dist", fmt("%d", est.max_dist));
  if (leaves > 0) {
    row("hitrate localizations", fmt("%.4g/%zu (%.2f)", hit_credit, leaves, hitrate));
    row("average radius", fmt("%.2f", mean_radius));
  }
  if (baseline) {
    out << std::string(48, '-') << '\n';
    row("Random baseline", fmt("%zu iterations", baseline->iterations));
    row("correct predictions", fmt("%.1f/%zu (%.2f), max %zu", baseline->mean_correct, est.n, baseline->mean_ratio,
                                   baseline->max_correct));
    row("average deviation", fmt("%.2f (SD: %.2f)", baseline->mean_avg_deviation, baseline->mean_sd));
    row("max dist", fmt("%d", baseline->max_dist_overall));
    row("empirical p", fmt("%.3g (observed %zu)", baseline->empirical_p, baseline->observed_correct));
  }
  return out.str();
}

}  // namespace stemmaplace
