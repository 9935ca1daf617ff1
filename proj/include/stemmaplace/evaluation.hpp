#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace stemmaplace {

struct EstimateReport {
  std::size_t n = 0;
  std::size_t correct = 0;
  double ratio = 0.0;
  double avg_deviation = 0.0;  // mean |d_hat - d|
  double sd = 0.0;             // population SD of |d_hat - d|
  int max_dist = 0;
};

// Throws LengthMismatch, Empty.
EstimateReport score_estimates(const std::vector<int>& estimates, const std::vector<int>& truths);

struct BaselineReport {
  std::size_t iterations = 0;
  double mean_correct = 0.0;
  double mean_ratio = 0.0;
  double mean_avg_deviation = 0.0;
  double mean_sd = 0.0;
  int max_dist_overall = 0;
  std::size_t max_correct = 0;
  std::size_t observed_correct = 0;
  double empirical_p = 1.0;  // fraction of iterations with correct >= observed
};

// Monte Carlo over uniform estimates in [d_min, d_max]. Iteration i draws
// from an Rng seeded with derive_seed(seed, i). Throws BadRange, Empty.
BaselineReport run_baseline(const std::vector<int>& truths, int d_min, int d_max, std::size_t iterations,
                            std::uint64_t seed, std::size_t observed_correct);

struct ExpectedBaseline {
  double ratio = 0.0;
  double avg_deviation = 0.0;
  // Standard deviation of a single iteration's correct ratio.
  double ratio_sd = 0.0;
  // Standard deviation of a single iteration's avg_deviation.
  double avg_deviation_sd = 0.0;
};

ExpectedBaseline expected_baseline(const std::vector<int>& truths, int d_min, int d_max);

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const BaselineReport& r);

// Aligned text table in the layout of a results summary.
std::string format_results_table(const EstimateReport& est, double hitrate, double hit_credit, std::size_t leaves,
                                 double mean_radius, const BaselineReport* baseline);

}  // namespace stemmaplace
