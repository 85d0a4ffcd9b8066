#pragma once

#include <array>
#include <cstdint>
#include <cmath>

#include "persuasion/model.hpp"
#include "persuasion/rng.hpp"

namespace persuasion {

// Fraction of the horizon discarded before occupancy starts accumulating,
// to wash out the initial condition.
inline constexpr double kBurnInFraction = 0.01;

/// Empirical long-run statistics of one simulated trajectory.
struct SimulationResult {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;
  double sender_utility_hat = 0.0;  // p01 + p11, same trajectory
  double horizon = 0.0;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;

  /// Empirical receiver utility under weight q. Occupancy integration is
  /// exact, so this equals the time-average of the realized utility.
  double receiver_utility_hat(double q) const {
    return q * p00 + (1.0 - q) * p11;
  }
};

namespace detail {

// Occupancy accumulator over [burn_in, horizon] with exact sojourn times.
struct OccupancyClock {
  double burn_in;
  double horizon;
  std::array<double, 4> time{};  // indexed 2*x + xhat

  void add(int x, int xhat, double from, double to) {
    const double lo = from > burn_in ? from : burn_in;
    const double hi = to < horizon ? to : horizon;
    if (hi > lo) time[2 * x + xhat] += hi - lo;
  }

  void fill(SimulationResult& result) const {
    const double total = time[0] + time[1] + time[2] + time[3];
    result.p00 = time[0] / total;
    result.p01 = time[1] / total;
    result.p10 = time[2] / total;
    result.p11 = time[3] / total;
    result.sender_utility_hat = result.p01 + result.p11;
  }
};

inline void check_sim_args(double s, double c, double horizon) {
  if (!finite_in_range(s, 0.0, kMaxRate) || !finite_in_range(c, 0.0, kMaxRate)) {
    throw ValidationError("sampling rates must be finite, >= 0 and <= 1e9");
  }
  if (!(std::isfinite(horizon) && horizon > 0.0)) {
    throw NonPositiveHorizon("simulation horizon must be positive");
  }
}

}  // namespace detail

/// Simulate the joint (state, estimate) chain directly from its generator:
///   (0,0) --lambda--> (1,0)
///   (1,0) --mu--> (0,0),  --s--> (1,1)
///   (1,1) --mu--> (0,1)
///   (0,1) --c--> (0,0),  --lambda--> (1,1)
/// Sojourns are exponential in the total exit rate; the jump is picked in
/// proportion to the individual rates. The initial state is (x0, x0) with
/// x0 drawn from the source prior. Deterministic given the seed.
inline SimulationResult simulate_joint(const SourceParams& src, double s,
                                       double c, double horizon,
                                       std::uint64_t seed) {
  detail::check_sim_args(s, c, horizon);
  if (s + c <= 0.0) {
    throw DegenerateRates("joint simulation needs s + c > 0");
  }

  const double lambda = src.lambda;
  const double mu = src.mu;
  Rng rng(seed);

  int x = rng.bernoulli(prior_distribution(src).pi1) ? 1 : 0;
  int xhat = x;

  SimulationResult result;
  result.horizon = horizon;
  result.seed = seed;
  detail::OccupancyClock clock{kBurnInFraction * horizon, horizon, {}};

  double t = 0.0;
  while (t < horizon) {
    // Exit rates from (x, xhat): first entry flips the source, second
    // moves the estimate.
    double flip_rate, move_rate;
    if (x == 0 && xhat == 0) { flip_rate = lambda; move_rate = 0.0; }
    else if (x == 1 && xhat == 0) { flip_rate = mu; move_rate = s; }
    else if (x == 1 && xhat == 1) { flip_rate = mu; move_rate = 0.0; }
    else { flip_rate = lambda; move_rate = c; }

    const double total = flip_rate + move_rate;
    const double dwell = rng.exponential(total);
    clock.add(x, xhat, t, t + dwell);
    t += dwell;
    if (t >= horizon) break;

    ++result.events;
    if (move_rate > 0.0 && rng.uniform() * total >= flip_rate) {
      // Estimate moves: a sample lands (1,0)->(1,1), or a 0-sample drains
      // (0,1)->(0,0).
      xhat = x;
    } else {
      x = 1 - x;
    }
  }

  clock.fill(result);
  return result;
}

/// Simulate the physical construction: the source trajectory x(t) under
/// rates (lambda, mu), plus a state-modulated Poisson sampling process
/// (rate s while x = 1, rate c while x = 0). Each sample copies the
/// current state into the estimate, which holds until the next sample.
/// The receiver knows x(0), so the estimate starts at x(0) ~ prior.
/// s = c = 0 is allowed: the estimate stays frozen at x(0).
inline SimulationResult simulate_physical(const SourceParams& src, double s,
                                          double c, double horizon,
                                          std::uint64_t seed) {
  detail::check_sim_args(s, c, horizon);

  const double lambda = src.lambda;
  const double mu = src.mu;
  Rng rng(seed);

  int x = rng.bernoulli(prior_distribution(src).pi1) ? 1 : 0;
  int xhat = x;

  SimulationResult result;
  result.horizon = horizon;
  result.seed = seed;
  detail::OccupancyClock clock{kBurnInFraction * horizon, horizon, {}};

  double t = 0.0;
  while (t < horizon) {
    const double flip_rate = x == 1 ? mu : lambda;
    const double sample_rate = x == 1 ? s : c;
    const double dt_flip = rng.exponential(flip_rate);
    const double dt_sample = rng.exponential(sample_rate);
    const double dwell = dt_flip < dt_sample ? dt_flip : dt_sample;

    clock.add(x, xhat, t, t + dwell);
    t += dwell;
    if (t >= horizon) break;

    ++result.events;
    if (dt_sample < dt_flip) {
      xhat = x;  // transmission: receiver adopts the current state
    } else {
      x = 1 - x;
    }
  }

  clock.fill(result);
  return result;
}

}  // namespace persuasion
