#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stemmaplace/pairgen.hpp"
#include "stemmaplace/rng.hpp"
#include "stemmaplace/seq2seq.hpp"
#include "stemmaplace/stemma.hpp"

namespace stemmaplace {

// Predicted edge distance between a query witness and a backbone node.
struct DistanceEstimate {
  std::string query;
  std::string other;
  int d_hat = 0;
  std::vector<std::string> raw_output;
};

// First decoded token parsed as an integer; repeated tokens after it are
// ignored. Throws NoTokenEmitted for an empty decode and ParseError for a
// non-numeric first token.
int first_distance_token(const std::vector<std::string>& decoded);

struct PairQuery {
  std::string query;
  std::string other;
  std::vector<std::string> source;  // encoded (query, other) pair tokens
};

class DistanceEstimator {
 public:
  virtual ~DistanceEstimator() = default;
  virtual DistanceEstimate estimate(const PairQuery& q) = 0;
};

class Seq2SeqEstimator : public DistanceEstimator {
 public:
  explicit Seq2SeqEstimator(std::shared_ptr<const Seq2SeqModel> model) : model_(std::move(model)) {}
  DistanceEstimate estimate(const PairQuery& q) override;

 private:
  std::shared_ptr<const Seq2SeqModel> model_;
};

// Reads true tree distances; a test oracle for the placement logic.
class OracleEstimator : public DistanceEstimator {
 public:
  explicit OracleEstimator(const Stemma& truth) : dist_(truth) {}
  DistanceEstimate estimate(const PairQuery& q) override;

 private:
  DistanceMatrix dist_;
};

// Uniform integer in [d_min, d_max] per query.
class RandomEstimator : public DistanceEstimator {
 public:
  RandomEstimator(int d_min, int d_max, std::uint64_t seed);  // throws BadRange
  DistanceEstimate estimate(const PairQuery& q) override;
  int draw();

 private:
  int d_min_;
  int d_max_;
  Rng rng_;
};

inline std::unique_ptr<DistanceEstimator> oracle_estimator(const Stemma& truth) {
  return std::make_unique<OracleEstimator>(truth);
}
inline std::unique_ptr<DistanceEstimator> random_estimator(int d_min, int d_max, std::uint64_t seed) {
  return std::make_unique<RandomEstimator>(d_min, d_max, seed);
}

// Queries every test instance as (held_leaf, other).
std::vector<DistanceEstimate> estimate_all(DistanceEstimator& est, const std::vector<PairInstance>& test,
                                           std::string_view held_leaf);

}  // namespace stemmaplace
