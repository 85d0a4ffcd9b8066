#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "persuasion/errors.hpp"

namespace persuasion {

// Upper bound on every rate we accept. Keeps the normalizer kappa (a cubic
// in the rates) far away from overflow.
inline constexpr double kMaxRate = 1e9;

// Tolerance on c - c_min when deciding whether the receiver follows the
// sender's messages. Ties go to the sender.
inline constexpr double kIcTolerance = 1e-9;

inline bool finite_in_range(double x, double lo, double hi) {
  return std::isfinite(x) && x >= lo && x <= hi;
}

/// One binary source: a 2-state CTMC flipping 0 -> 1 with rate `lambda`
/// and 1 -> 0 with rate `mu`.
struct SourceParams {
  double lambda = 0.0;
  double mu = 0.0;

  SourceParams() = default;
  SourceParams(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
    if (!(std::isfinite(lambda) && lambda > 0.0 && lambda <= kMaxRate) ||
        !(std::isfinite(mu) && mu > 0.0 && mu <= kMaxRate)) {
      throw InvalidInstance("source rates must be finite, positive and <= 1e9 "
                            "(got lambda=" + std::to_string(lambda) +
                            ", mu=" + std::to_string(mu) + ")");
    }
  }
};

/// Sampling rates the sender commits to for one source: rate `s` while the
/// source sits in state 1, rate `c` while it sits in state 0.
struct RateAllocation {
  double s = 0.0;
  double c = 0.0;
};

/// Per-source sampling rates for a whole instance.
struct RatePolicy {
  std::vector<RateAllocation> rates;

  RatePolicy() = default;
  explicit RatePolicy(std::vector<RateAllocation> r) : rates(std::move(r)) {
    for (const auto& a : rates) {
      if (!finite_in_range(a.s, 0.0, kMaxRate) ||
          !finite_in_range(a.c, 0.0, kMaxRate)) {
        throw ValidationError("rate policy entries must be finite, >= 0 and <= 1e9");
      }
    }
  }

  double budget_usage() const {
    double total = 0.0;
    for (const auto& a : rates) total += a.s + a.c;
    return total;
  }

  std::size_t size() const { return rates.size(); }
};

/// Stationary occupancy of the joint (state, estimate) chain, plus the
/// normalizer it was divided by.
struct StationaryDistribution {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;
  double kappa = 0.0;
};

enum class BestResponse {
  FollowSender,  // adopt each message as the running estimate
  Default        // ignore messages, estimate 0 always
};

inline const char* to_string(BestResponse br) {
  return br == BestResponse::FollowSender ? "follow" : "default";
}

/// Marginal stationary distribution of a single source.
/// pi0 = mu/(mu+lambda), pi1 = lambda/(mu+lambda).
struct Prior {
  double pi0 = 0.0;
  double pi1 = 0.0;
};

inline Prior prior_distribution(const SourceParams& src) {
  const double denom = src.mu + src.lambda;
  return {src.mu / denom, src.lambda / denom};
}

/// Minimum state-0 sampling rate that keeps the receiver willing to follow
/// messages: c_min = q*mu/(1-q) - lambda, strictly positive under the
/// instance assumption q*mu > (1-q)*lambda.
inline double c_min(const SourceParams& src, double q) {
  const double value = q * src.mu / (1.0 - q) - src.lambda;
  if (!(value > 0.0)) {
    throw InvalidInstance("default-estimate assumption violated: need q*mu > (1-q)*lambda "
                          "(lambda=" + std::to_string(src.lambda) +
                          ", mu=" + std::to_string(src.mu) +
                          ", q=" + std::to_string(q) + ")");
  }
  return value;
}

/// Stationary distribution of the joint 4-state chain over (state, estimate)
/// under rates (s, c). Undefined at s = c = 0.
inline StationaryDistribution joint_stationary(const SourceParams& src,
                                               double s, double c) {
  if (!finite_in_range(s, 0.0, kMaxRate) || !finite_in_range(c, 0.0, kMaxRate)) {
    throw ValidationError("sampling rates must be finite, >= 0 and <= 1e9");
  }
  if (s + c <= 0.0) {
    throw DegenerateRates("joint chain is undefined at s = c = 0");
  }
  const double lambda = src.lambda;
  const double mu = src.mu;
  const double kappa = (mu + lambda) * (mu * c + lambda * s + c * s);
  StationaryDistribution pi;
  pi.kappa = kappa;
  pi.p00 = mu * c * (mu + s) / kappa;
  pi.p01 = mu * lambda * s / kappa;
  pi.p10 = mu * lambda * c / kappa;
  pi.p11 = lambda * s * (lambda + c) / kappa;
  return pi;
}

/// Long-run fraction of time the estimate sits at 1 when the receiver
/// follows messages: p01 + p11. By convention 0 at s = c = 0 (no sampling,
/// estimate pinned to the default). Callers gate on best_response; this
/// does not check the IC condition.
inline double sender_utility_term(const SourceParams& src, double s, double c) {
  if (s == 0.0 && c == 0.0) return 0.0;
  const double lambda = src.lambda;
  const double mu = src.mu;
  const double kappa = (mu + lambda) * (mu * c + lambda * s + c * s);
  return lambda * s * (c + lambda + mu) / kappa;
}

/// Receiver's long-run average utility q*p00 + (1-q)*p11 when following.
inline double receiver_utility(const SourceParams& src, double q,
                               double s, double c) {
  const StationaryDistribution pi = joint_stationary(src, s, c);
  return q * pi.p00 + (1.0 - q) * pi.p11;
}

/// Utility of ignoring messages and estimating 0 always: q*mu/(mu+lambda).
inline double receiver_default_utility(const SourceParams& src, double q) {
  return q * src.mu / (src.mu + src.lambda);
}

/// The receiver's best response to (s, c). Following is weakly better
/// exactly when c >= c_min (given s > 0); ties go to the sender. With
/// s = 0 both responses yield the default utility, so the tie rule applies.
inline BestResponse best_response(const SourceParams& src, double q,
                                  double s, double c) {
  if (s <= 0.0) return BestResponse::FollowSender;
  return (c - c_min(src, q) >= -kIcTolerance) ? BestResponse::FollowSender
                                              : BestResponse::Default;
}

struct SenderUtilityPartials {
  double d_ds = 0.0;
  double d_dc = 0.0;
};

/// Partial derivatives of sender_utility_term in (s, c). Positive in s when
/// c > 0, negative in c when s > 0.
inline SenderUtilityPartials sender_utility_partials(const SourceParams& src,
                                                     double s, double c) {
  if (s == 0.0 && c == 0.0) {
    throw DegenerateRates("partials are undefined at s = c = 0");
  }
  const double lambda = src.lambda;
  const double mu = src.mu;
  const double inner = mu * c + lambda * s + c * s;
  const double denom = (mu + lambda) * inner * inner;
  return {lambda * mu * c * (lambda + mu + c) / denom,
          -lambda * mu * s * (lambda + mu + s) / denom};
}

/// A full problem: the sources, the receiver weight q and the total
/// sampling budget R. Construction enforces 0 < q < 1, R >= 0 and the
/// default-estimate assumption q*mu_i > (1-q)*lambda_i for every source.
struct ProblemInstance {
  std::vector<SourceParams> sources;
  double q = 0.5;
  double budget = 0.0;

  ProblemInstance() = default;
  ProblemInstance(std::vector<SourceParams> sources_, double q_, double budget_)
      : sources(std::move(sources_)), q(q_), budget(budget_) {
    if (sources.empty()) throw InvalidInstance("need at least one source");
    if (!(std::isfinite(q) && q > 0.0 && q < 1.0)) {
      throw InvalidInstance("receiver weight q must lie in (0, 1)");
    }
    if (!(std::isfinite(budget) && budget >= 0.0)) {
      throw InvalidInstance("budget must be finite and >= 0");
    }
    for (const auto& src : sources) (void)persuasion::c_min(src, q);
  }

  std::size_t size() const { return sources.size(); }
  double c_min(std::size_t i) const { return persuasion::c_min(sources[i], q); }

  /// Receiver utility when every source is estimated by the default rule.
  double default_utility_total() const {
    double total = 0.0;
    for (const auto& src : sources) total += receiver_default_utility(src, q);
    return total;
  }
};

}  // namespace persuasion
