#pragma once

#include <cstddef>
#include <vector>

#include "persuasion/model.hpp"

namespace persuasion {

/// A solved game: the sender's committed policy, the receiver's best
/// response per source, both long-run utilities, and the indices of the
/// sources that actually carry state-1 updates (s_i > 0).
struct EquilibriumOutcome {
  RatePolicy policy;
  std::vector<BestResponse> responses;
  double sender_utility = 0.0;
  double receiver_utility = 0.0;
  std::vector<std::size_t> active_set;

  double budget_usage() const { return policy.budget_usage(); }
};

/// The all-zero outcome used whenever the budget cannot buy persuasion for
/// any source: nothing is sampled, the receiver defaults everywhere.
inline EquilibriumOutcome no_persuasion_outcome(const ProblemInstance& instance) {
  EquilibriumOutcome out;
  out.policy.rates.assign(instance.size(), RateAllocation{0.0, 0.0});
  out.responses.assign(instance.size(), BestResponse::Default);
  out.sender_utility = 0.0;
  out.receiver_utility = instance.default_utility_total();
  return out;
}

}  // namespace persuasion
