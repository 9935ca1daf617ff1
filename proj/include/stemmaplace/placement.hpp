#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stemmaplace/estimator.hpp"
#include "stemmaplace/stemma.hpp"

namespace stemmaplace {

enum class PlacementRule { UniqueDistanceOne, Voting };

std::string_view to_string(PlacementRule r);

struct PlacementResult {
  std::string query;
  std::vector<std::string> winners;  // sorted; more than one on a tie
  std::map<std::string, int> votes;  // every backbone node
  PlacementRule rule_used = PlacementRule::Voting;
  int zero_estimates = 0;  // estimates with d_hat <= 0, which vote for nothing

  // Filled by attach_truth.
  std::optional<std::string> true_parent;
  std::optional<double> radius;
  std::optional<double> hit_credit;
};

// Exactly one estimate per backbone node is required. If exactly one node
// has d_hat = 1 it wins outright; otherwise each estimate (x, d) votes for
// every node at backbone distance d - 1 from x and the maximal vote count wins.
// Throws MissingEstimate, EstimateForUnknownNode.
PlacementResult place(const Stemma& backbone, const std::vector<DistanceEstimate>& estimates);

// Mean backbone distance from the winners to the true parent.
double placement_radius(const Stemma& backbone, const PlacementResult& result, std::string_view true_parent);

// Sets true_parent, radius and hit_credit (1/k if the truth is among k winners).
void attach_truth(PlacementResult& result, const Stemma& backbone, std::string_view true_parent);

// Sum of hit credits over the results divided by their count.
double hitrate(const std::vector<PlacementResult>& results);
double mean_radius(const std::vector<PlacementResult>& results);

nlohmann::json to_json(const PlacementResult& r);
nlohmann::json placement_report(const std::vector<PlacementResult>& results);

}  // namespace stemmaplace
