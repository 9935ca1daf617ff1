#include "stemmaplace/estimator.hpp"

#include <charconv>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

int first_distance_token(const std::vector<std::string>& decoded) {
  if (decoded.empty()) throw Error(ErrorKind::NoTokenEmitted, "decoder emitted end-of-sequence first");
  const auto& tok = decoded.front();
  int value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorKind::ParseError, "non-numeric distance token '" + tok + "'");
  return value;
}

DistanceEstimate Seq2SeqEstimator::estimate(const PairQuery& q) {
  auto out = model_->decode(q.source);
  const int d = first_distance_token(out);
  return {q.query, q.other, d, std::move(out)};
}

DistanceEstimate OracleEstimator::estimate(const PairQuery& q) {
  const int d = dist_.at(q.query, q.other);
  return {q.query, q.other, d, {std::to_string(d)}};
}

RandomEstimator::RandomEstimator(int d_min, int d_max, std::uint64_t seed)
    : d_min_(d_min), d_max_(d_max), rng_(seed) {
  if (d_min > d_max) throw Error(ErrorKind::BadRange, std::to_string(d_min) + " > " + std::to_string(d_max));
}

int RandomEstimator::draw() { return static_cast<int>(rng_.uniform_int(d_min_, d_max_)); }

DistanceEstimate RandomEstimator::estimate(const PairQuery& q) {
  const int d = draw();
  return {q.query, q.other, d, {std::to_string(d)}};
}

std::vector<DistanceEstimate> estimate_all(DistanceEstimator& est, const std::vector<PairInstance>& test,
                                           std::string_view held_leaf) {
  std::vector<DistanceEstimate> out;
  out.reserve(test.size());
  for (const auto& inst : test) {
    if (!inst.involves(held_leaf))
      throw Error(ErrorKind::UnknownWitness, "test pair " + inst.a + "/" + inst.b + " lacks " + std::string(held_leaf));
    const std::string other = inst.a == held_leaf ? inst.b : inst.a;
    out.push_back(est.estimate({std::string(held_leaf), other, inst.source}));
  }
  return out;
}

}  // namespace stemmaplace
