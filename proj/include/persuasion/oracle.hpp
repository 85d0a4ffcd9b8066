#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "persuasion/model.hpp"

namespace persuasion {

/// Resolution and size caps for the brute-force maximizer.
struct GridSpec {
  double step = 0.01;
  std::size_t max_sources = 2;
};

struct OracleResult {
  RatePolicy policy;
  double utility = 0.0;
};

namespace detail {

inline std::vector<double> lattice_values(double step, double budget) {
  std::vector<double> values;
  for (std::size_t k = 0;; ++k) {
    const double v = static_cast<double>(k) * step;
    if (v > budget) break;
    values.push_back(v);
  }
  return values;
}

}  // namespace detail

/// Exhaustive grid maximizer of the raw game value: every grid policy is
/// priced as the sum over sources of the sender term, gated to zero when
/// the receiver's best response is to ignore that source. No structure of
/// the optimum is assumed, which is the point — this cross-checks the
/// analytical solvers from below.
///
/// The c axes carry the exact c_min of their source as an off-lattice
/// extra; the optimum sits exactly there and a pure lattice would miss it
/// by up to one step every time.
///
/// Ties resolve to the lexicographically smallest point in axis order
/// (s_1, c_1, s_2, c_2, ...).
inline OracleResult grid_oracle(const ProblemInstance& instance,
                                const GridSpec& grid) {
  if (!(std::isfinite(grid.step) && grid.step > 0.0)) {
    throw ValidationError("grid step must be positive");
  }
  if (grid.max_sources < 1) {
    throw ValidationError("max_sources must be >= 1");
  }
  const std::size_t n = instance.size();
  if (n > grid.max_sources) {
    throw TooLarge("grid oracle capped at " + std::to_string(grid.max_sources) +
                   " sources (got " + std::to_string(n) + ")");
  }
  if (instance.budget / grid.step > 1e4) {
    throw TooLarge("grid too fine: budget/step exceeds 1e4 points per axis");
  }

  const double budget = instance.budget;
  const std::vector<double> s_axis = detail::lattice_values(grid.step, budget);
  std::vector<std::vector<double>> c_axes(n);
  for (std::size_t i = 0; i < n; ++i) {
    c_axes[i] = s_axis;
    const double cmin = instance.c_min(i);
    if (cmin <= budget &&
        std::find(c_axes[i].begin(), c_axes[i].end(), cmin) == c_axes[i].end()) {
      c_axes[i].insert(
          std::upper_bound(c_axes[i].begin(), c_axes[i].end(), cmin), cmin);
    }
  }

  // Gated per-source utility, tabulated once per (s index, c index).
  std::vector<std::vector<double>> tables(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SourceParams& src = instance.sources[i];
    tables[i].resize(s_axis.size() * c_axes[i].size());
    for (std::size_t si = 0; si < s_axis.size(); ++si) {
      for (std::size_t ci = 0; ci < c_axes[i].size(); ++ci) {
        const double s = s_axis[si];
        const double c = c_axes[i][ci];
        const bool follows =
            best_response(src, instance.q, s, c) == BestResponse::FollowSender;
        tables[i][si * c_axes[i].size() + ci] =
            follows ? sender_utility_term(src, s, c) : 0.0;
      }
    }
  }

  std::vector<RateAllocation> current(n, RateAllocation{0.0, 0.0});
  OracleResult best;
  best.policy.rates = current;
  best.utility = -1.0;

  // Depth-first over sources in index order; rem prunes whole subtrees.
  auto visit = [&](auto&& self, std::size_t i, double rem, double utility) -> void {
    if (i == n) {
      double usage = 0.0;
      for (const auto& a : current) usage += a.s + a.c;
      if (usage > budget) return;  // rem arithmetic can round past the cap
      if (utility > best.utility) {
        best.utility = utility;
        best.policy.rates = current;
      }
      return;
    }
    for (std::size_t si = 0; si < s_axis.size(); ++si) {
      const double s = s_axis[si];
      if (s > rem) break;
      for (std::size_t ci = 0; ci < c_axes[i].size(); ++ci) {
        const double c = c_axes[i][ci];
        if (s + c > rem) break;
        current[i] = {s, c};
        self(self, i + 1, rem - s - c,
             utility + tables[i][si * c_axes[i].size() + ci]);
      }
    }
    current[i] = {0.0, 0.0};
  };
  visit(visit, 0, budget, 0.0);
  // The all-zero point is always on the grid, so best.utility >= 0 here.
  return best;
}

}  // namespace persuasion
