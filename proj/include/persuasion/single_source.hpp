#pragma once

#include "persuasion/equilibrium.hpp"
#include "persuasion/model.hpp"

namespace persuasion {

/// Exact Stackelberg equilibrium for one source.
///
/// Below the persuasion threshold (R < c_min) no policy can satisfy the
/// receiver, so the sender commits to (0, 0) and earns nothing. From
/// R >= c_min on, the sender pays exactly c_min on the 0-state and pours
/// the rest into the 1-state: policy (R - c_min, c_min). At R = c_min that
/// leaves s = 0 and zero sender utility, but the receiver still follows.
inline EquilibriumOutcome solve_single(const SourceParams& src, double q,
                                       double budget) {
  const double cmin = c_min(src, q);
  if (!(std::isfinite(budget) && budget >= 0.0)) {
    throw InvalidInstance("budget must be finite and >= 0");
  }

  EquilibriumOutcome out;
  if (budget < cmin) {
    out.policy.rates = {RateAllocation{0.0, 0.0}};
    out.responses = {BestResponse::Default};
    out.sender_utility = 0.0;
    out.receiver_utility = receiver_default_utility(src, q);
    return out;
  }

  const double s = budget - cmin;
  out.policy.rates = {RateAllocation{s, cmin}};
  out.responses = {BestResponse::FollowSender};
  out.sender_utility = sender_utility_term(src, s, cmin);
  out.receiver_utility = receiver_utility(src, q, s, cmin);
  if (s > 0.0) out.active_set = {0};
  return out;
}

}  // namespace persuasion
