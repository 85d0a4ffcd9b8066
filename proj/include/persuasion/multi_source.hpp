#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <future>
#include <optional>
#include <thread>
#include <vector>

#include "persuasion/equilibrium.hpp"
#include "persuasion/model.hpp"

namespace persuasion {

// Exhaustive subset search walks 2^n - 1 candidates; past this it is no
// longer a reasonable default.
inline constexpr std::size_t kMaxExhaustiveSources = 20;

// Absolute tolerance on the budget residual the dual bisection must meet.
inline constexpr double kBisectionTolerance = 1e-9;
inline constexpr int kBisectionMaxIter = 200;

// An s_i this close to zero on an active source disqualifies the candidate:
// the optimum never pays c_min without sending 1-state updates.
inline constexpr double kPruneTolerance = 1e-9;

/// Subset of source indices, canonically a bitmask (bit i = source i).
struct ActiveSet {
  std::uint64_t mask = 0;

  bool contains(std::size_t i) const { return (mask >> i) & 1u; }
  int count() const { return std::popcount(mask); }
  bool empty() const { return mask == 0; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < 64; ++i) {
      if (contains(i)) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

/// Per-source constants of the KKT stationarity condition, precomputed so
/// the water-filling formula is a single sqrt per source:
///   a = lambda * (c_min + mu + lambda)
///   b = c_min * mu * (lambda + mu)
///   c = c_min * mu / (lambda + c_min)
/// The allocation s_i(theta) = c * (sqrt(a/(b*theta)) - 1)+ hits zero at
/// theta = a/b.
struct WaterFillConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double threshold() const { return a / b; }
};

inline WaterFillConstants water_fill_constants(const SourceParams& src,
                                               double cmin) {
  WaterFillConstants k;
  k.a = src.lambda * (cmin + src.mu + src.lambda);
  k.b = cmin * src.mu * (src.lambda + src.mu);
  k.c = cmin * src.mu / (src.lambda + cmin);
  return k;
}

/// Water-filling allocation at dual level theta, one rate per constant set.
inline std::vector<double> water_fill_s(const std::vector<WaterFillConstants>& constants,
                                        double theta) {
  if (!(theta > 0.0)) {
    throw NonPositiveTheta("dual variable must be strictly positive");
  }
  std::vector<double> s(constants.size(), 0.0);
  for (std::size_t i = 0; i < constants.size(); ++i) {
    const auto& k = constants[i];
    const double root = std::sqrt(k.a / (k.b * theta));
    s[i] = root > 1.0 ? k.c * (root - 1.0) : 0.0;
  }
  return s;
}

inline double water_fill_total(const std::vector<WaterFillConstants>& constants,
                               double theta) {
  double total = 0.0;
  for (const auto& k : constants) {
    const double root = std::sqrt(k.a / (k.b * theta));
    if (root > 1.0) total += k.c * (root - 1.0);
  }
  return total;
}

/// Locate the dual level whose allocation exhausts the residual budget.
/// The total allocation is continuous and strictly decreasing in theta
/// until it hits zero at max a_i/b_i, so plain bisection converges; the
/// iteration cap is a safety net and trips NumericalFailure.
inline double bisect_theta(const std::vector<WaterFillConstants>& constants,
                           double residual_budget) {
  if (!(residual_budget > 0.0)) {
    throw InfeasibleResidual("no sampling rate left for 1-state updates");
  }
  if (constants.empty()) {
    throw InfeasibleResidual("no sources to allocate to");
  }

  double hi = 0.0;
  for (const auto& k : constants) hi = std::max(hi, k.threshold());

  // Shrink the lower end until the allocation overshoots the residual;
  // water_fill_total blows up as theta -> 0, so this terminates fast.
  double lo = 1e-12;
  while (water_fill_total(constants, lo) < residual_budget) {
    lo *= 0.1;
    if (lo < 1e-300) {
      throw NumericalFailure("could not bracket the dual variable");
    }
  }

  // Run the bracket down to float granularity; the tolerance below is the
  // guarantee we verify, not the stopping rule, so allocations land within
  // an ulp of the exact water level.
  double theta = 0.5 * (lo + hi);
  for (int iter = 0; iter < kBisectionMaxIter; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted
    theta = mid;
    if (water_fill_total(constants, mid) > residual_budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double achieved = water_fill_total(constants, theta);
  // For huge residuals the sum's own float granularity caps what any theta
  // can achieve; scale the acceptance accordingly.
  const double tol = std::max(kBisectionTolerance,
                              4e-16 * std::abs(residual_budget));
  if (std::abs(achieved - residual_budget) > tol) {
    throw NumericalFailure("dual bisection did not meet tolerance within iteration cap");
  }
  return theta;
}

/// Best allocation for one fixed subset of persuaded sources.
struct CandidateSolution {
  ActiveSet active_set;
  std::vector<double> s;  // full length, zero off the set
  double theta = 0.0;
  double utility = 0.0;
  bool feasible = false;
  bool pruned = false;  // some member ended up with s_i ~ 0
};

/// Evaluate one active set: check the IC rates fit the budget, water-fill
/// the remainder, and price the result. Candidates where a member gets no
/// 1-state rate are flagged pruned; they cannot be globally optimal.
inline CandidateSolution solve_active_set(const ProblemInstance& instance,
                                          ActiveSet set) {
  if (instance.size() < 64 && (set.mask >> instance.size()) != 0) {
    throw ValidationError("active set references a source index out of range");
  }
  CandidateSolution cand;
  cand.active_set = set;
  cand.s.assign(instance.size(), 0.0);
  if (set.empty()) return cand;  // nothing to persuade, nothing to allocate

  const auto members = set.indices();
  double cmin_sum = 0.0;
  std::vector<double> cmins(members.size());
  std::vector<WaterFillConstants> constants(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    cmins[m] = instance.c_min(members[m]);
    constants[m] = water_fill_constants(instance.sources[members[m]], cmins[m]);
    cmin_sum += cmins[m];
  }

  const double residual = instance.budget - cmin_sum;
  if (!(residual > 0.0)) {
    return cand;  // infeasible: IC rates alone exhaust the budget
  }

  cand.theta = bisect_theta(constants, residual);
  const std::vector<double> s_members = water_fill_s(constants, cand.theta);

  cand.feasible = true;
  cand.utility = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const std::size_t i = members[m];
    cand.s[i] = s_members[m];
    if (s_members[m] <= kPruneTolerance) cand.pruned = true;
    cand.utility += sender_utility_term(instance.sources[i], s_members[m], cmins[m]);
  }
  return cand;
}

namespace detail {

// Deterministic candidate order: higher utility first, then fewer members,
// then smaller bitmask. Total order, so parallel evaluation schedules
// cannot change the winner.
inline bool candidate_improves(const CandidateSolution& challenger,
                               const std::optional<CandidateSolution>& best) {
  if (!challenger.feasible || challenger.pruned) return false;
  if (!best) return true;
  if (challenger.utility != best->utility) return challenger.utility > best->utility;
  if (challenger.active_set.count() != best->active_set.count()) {
    return challenger.active_set.count() < best->active_set.count();
  }
  return challenger.active_set.mask < best->active_set.mask;
}

inline std::optional<CandidateSolution> best_candidate_in_range(
    const ProblemInstance& instance, std::uint64_t first, std::uint64_t last) {
  std::optional<CandidateSolution> best;
  for (std::uint64_t mask = first; mask < last; ++mask) {
    CandidateSolution cand = solve_active_set(instance, ActiveSet{mask});
    if (candidate_improves(cand, best)) best = std::move(cand);
  }
  return best;
}

}  // namespace detail

/// Multi-source Stackelberg optimum by exhaustive active-set search.
///
/// Every nonempty subset is water-filled independently; infeasible subsets
/// and subsets whose allocation leaves a member without 1-state updates are
/// discarded. If nothing survives the sender cannot persuade anyone and the
/// all-zero outcome is returned. `threads` splits the subset range; the
/// deterministic tie-break makes the result schedule-independent.
inline EquilibriumOutcome solve_multi(const ProblemInstance& instance,
                                      unsigned threads = 1) {
  const std::size_t n = instance.size();
  if (n > kMaxExhaustiveSources) {
    throw TooLarge("exhaustive active-set search is capped at " +
                   std::to_string(kMaxExhaustiveSources) + " sources (got " +
                   std::to_string(n) + ")");
  }

  const std::uint64_t end = std::uint64_t{1} << n;
  std::optional<CandidateSolution> best;
  if (threads <= 1 || end <= 64) {
    best = detail::best_candidate_in_range(instance, 1, end);
  } else {
    const unsigned workers =
        std::min<unsigned>(threads, std::thread::hardware_concurrency() > 0
                                        ? std::thread::hardware_concurrency()
                                        : threads);
    const std::uint64_t chunk = (end - 1 + workers - 1) / workers;
    std::vector<std::future<std::optional<CandidateSolution>>> futures;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t first = 1 + w * chunk;
      const std::uint64_t last = std::min<std::uint64_t>(first + chunk, end);
      if (first >= last) break;
      futures.push_back(std::async(std::launch::async,
                                   detail::best_candidate_in_range,
                                   std::cref(instance), first, last));
    }
    for (auto& f : futures) {
      std::optional<CandidateSolution> local = f.get();
      if (local && detail::candidate_improves(*local, best)) best = std::move(local);
    }
  }

  if (!best) {
    return no_persuasion_outcome(instance);
  }

  EquilibriumOutcome out;
  out.policy.rates.assign(n, RateAllocation{0.0, 0.0});
  out.responses.assign(n, BestResponse::Default);
  out.sender_utility = best->utility;
  out.receiver_utility = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best->active_set.contains(i)) {
      const double cmin = instance.c_min(i);
      out.policy.rates[i] = {best->s[i], cmin};
      out.responses[i] = BestResponse::FollowSender;
      out.active_set.push_back(i);
      out.receiver_utility +=
          receiver_utility(instance.sources[i], instance.q, best->s[i], cmin);
    } else {
      out.receiver_utility += receiver_default_utility(instance.sources[i], instance.q);
    }
  }
  return out;
}

}  // namespace persuasion
