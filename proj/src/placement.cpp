#include "stemmaplace/placement.hpp"

#include <algorithm>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

std::string_view to_string(PlacementRule r) {
  return r == PlacementRule::UniqueDistanceOne ? "unique_distance_one" : "voting";
}

PlacementResult place(const Stemma& backbone, const std::vector<DistanceEstimate>& estimates) {
  const DistanceMatrix dist(backbone);
  const auto n = backbone.size();
  std::vector<const DistanceEstimate*> by_node(n, nullptr);
  PlacementResult result;
  for (const auto& e : estimates) {
    if (!backbone.contains(e.other)) throw Error(ErrorKind::EstimateForUnknownNode, e.other);
    const auto i = backbone.index_of(e.other);
    if (by_node[i]) throw Error(ErrorKind::EstimateForUnknownNode, "duplicate estimate for " + e.other);
    by_node[i] = &e;
    if (result.query.empty()) result.query = e.query;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!by_node[i]) throw Error(ErrorKind::MissingEstimate, backbone.id(i));

  std::vector<int> votes(n, 0);
  std::vector<std::size_t> distance_one;
  for (std::size_t x = 0; x < n; ++x) {
    const int d = by_node[x]->d_hat;
    if (d == 1) distance_one.push_back(x);
    if (d <= 0) {
      ++result.zero_estimates;
      continue;
    }
    for (std::size_t y = 0; y < n; ++y)
      if (dist.at(y, x) == d - 1) ++votes[y];
  }
  for (std::size_t i = 0; i < n; ++i) result.votes.emplace(backbone.id(i), votes[i]);

  if (distance_one.size() == 1) {
    result.rule_used = PlacementRule::UniqueDistanceOne;
    result.winners = {backbone.id(distance_one.front())};
  } else {
    result.rule_used = PlacementRule::Voting;
    const int best = *std::max_element(votes.begin(), votes.end());
    for (std::size_t i = 0; i < n; ++i)
      if (votes[i] == best) result.winners.push_back(backbone.id(i));
  }
  return result;
}

double placement_radius(const Stemma& backbone, const PlacementResult& result, std::string_view true_parent) {
  const DistanceMatrix dist(backbone);
  const auto t = dist.index_of(true_parent);
  double sum = 0.0;
  for (const auto& w : result.winners) sum += dist.at(dist.index_of(w), t);
  return result.winners.empty() ? 0.0 : sum / static_cast<double>(result.winners.size());
}

void attach_truth(PlacementResult& result, const Stemma& backbone, std::string_view true_parent) {
  result.radius = placement_radius(backbone, result, true_parent);
  result.true_parent = std::string(true_parent);
  const bool hit = std::find(result.winners.begin(), result.winners.end(), true_parent) != result.winners.end();
  result.hit_credit = hit ? 1.0 / static_cast<double>(result.winners.size()) : 0.0;
}

double hitrate(const std::vector<PlacementResult>& results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += r.hit_credit.value_or(0.0);
  return sum / static_cast<double>(results.size());
}

double mean_radius(const std::vector<PlacementResult>& results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += r.radius.value_or(0.0);
  return sum / static_cast<double>(results.size());
}

nlohmann::json to_json(const PlacementResult& r) {
  nlohmann::json j = {{"query", r.query},
                      {"winners", r.winners},
                      {"votes", r.votes},
                      {"rule_used", std::string(to_string(r.rule_used))},
                      {"zero_estimates", r.zero_estimates}};
  if (r.true_parent) j["true_parent"] = *r.true_parent;
  if (r.radius) j["radius"] = *r.radius;
  if (r.hit_credit) j["hit_credit"] = *r.hit_credit;
  return j;
}

nlohmann::json placement_report(const std::vector<PlacementResult>& results) {
  nlohmann::json leaves = nlohmann::json::array();
  double credit = 0.0;
  for (const auto& r : results) {
    leaves.push_back(to_json(r));
    credit += r.hit_credit.value_or(0.0);
  }
  return {{"leaves", leaves},
          {"leaf_count", results.size()},
          {"hit_credit_total", credit},
          {"hitrate", hitrate(results)},
          {"mean_radius", mean_radius(results)}};
}

}  // namespace stemmaplace
