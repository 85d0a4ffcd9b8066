#pragma once

#include <cstdio>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "persuasion/config.hpp"
#include "persuasion/equilibrium.hpp"
#include "persuasion/multi_source.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/simulate.hpp"
#include "persuasion/single_source.hpp"

namespace persuasion {

// Half-width of the refined bracket around an active-set change.
inline constexpr double kBoundaryResolution = 0.01;

/// 17 significant digits: enough for exact double round-trips in CSV.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

// Evaluate fn(i) for i in [0, count) into a vector, optionally on several
// threads. Results land by index, so output order never depends on the
// schedule.
template <typename T, typename Fn>
std::vector<T> indexed_map(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<T> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::future<void>> futures;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t first = w * chunk;
    const std::size_t last = std::min(count, first + chunk);
    if (first >= last) break;
    futures.push_back(std::async(std::launch::async, [&, first, last] {
      for (std::size_t i = first; i < last; ++i) out[i] = fn(i);
    }));
  }
  for (auto& f : futures) f.get();
  return out;
}

inline std::vector<std::size_t> one_based(const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(i + 1);
  return out;
}

inline std::uint64_t active_mask(const EquilibriumOutcome& outcome) {
  std::uint64_t mask = 0;
  for (std::size_t i : outcome.active_set) mask |= std::uint64_t{1} << i;
  return mask;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveReport {
  ProblemInstance instance;
  EquilibriumOutcome outcome;
  std::vector<double> c_mins;
};

inline SolveReport run_solve(const ProblemInstance& instance, unsigned threads = 1) {
  SolveReport report;
  report.instance = instance;
  report.outcome = solve_multi(instance, threads);
  report.c_mins.reserve(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    report.c_mins.push_back(instance.c_min(i));
  }
  return report;
}

/// Source indices are 1-based everywhere in emitted output.
inline json to_json(const SolveReport& report) {
  json sources = json::array();
  for (std::size_t i = 0; i < report.instance.size(); ++i) {
    sources.push_back({{"index", i + 1},
                       {"lambda", report.instance.sources[i].lambda},
                       {"mu", report.instance.sources[i].mu},
                       {"c_min", report.c_mins[i]},
                       {"s", report.outcome.policy.rates[i].s},
                       {"c", report.outcome.policy.rates[i].c},
                       {"response", to_string(report.outcome.responses[i])}});
  }
  return {{"q", report.instance.q},
          {"budget", report.instance.budget},
          {"sources", sources},
          {"active_set", detail::one_based(report.outcome.active_set)},
          {"sender_utility", report.outcome.sender_utility},
          {"receiver_utility", report.outcome.receiver_utility},
          {"budget_usage", report.outcome.budget_usage()}};
}

inline void write_csv(const SolveReport& report, std::ostream& os) {
  os << "index,lambda,mu,c_min,s,c,response,sender_utility,receiver_utility,budget_usage\n";
  for (std::size_t i = 0; i < report.instance.size(); ++i) {
    os << i + 1 << ',' << format_double(report.instance.sources[i].lambda) << ','
       << format_double(report.instance.sources[i].mu) << ','
       << format_double(report.c_mins[i]) << ','
       << format_double(report.outcome.policy.rates[i].s) << ','
       << format_double(report.outcome.policy.rates[i].c) << ','
       << to_string(report.outcome.responses[i]) << ','
       << format_double(report.outcome.sender_utility) << ','
       << format_double(report.outcome.receiver_utility) << ','
       << format_double(report.outcome.budget_usage()) << '\n';
  }
}

// ---------------------------------------------------------------------------
// sweep-budget
// ---------------------------------------------------------------------------

struct BudgetRow {
  double budget = 0.0;
  double sender_utility = 0.0;
  double receiver_utility = 0.0;
  std::uint64_t mask = 0;
  std::vector<double> s;
  std::vector<double> c;
};

struct BoundaryRecord {
  double budget = 0.0;        // midpoint of the refined bracket
  std::uint64_t from_mask = 0;
  std::uint64_t to_mask = 0;
};

struct BudgetSweepResult {
  std::vector<BudgetRow> rows;
  std::vector<BoundaryRecord> boundaries;
};

namespace detail {

inline BudgetRow budget_row(const ExperimentConfig& cfg, double r, unsigned threads) {
  const ProblemInstance instance = cfg.instance_at("sweep-budget", r);
  const EquilibriumOutcome outcome = solve_multi(instance, threads);
  BudgetRow row;
  row.budget = r;
  row.sender_utility = outcome.sender_utility;
  row.receiver_utility = outcome.receiver_utility;
  row.mask = active_mask(outcome);
  row.s.reserve(instance.size());
  row.c.reserve(instance.size());
  for (const auto& a : outcome.policy.rates) {
    row.s.push_back(a.s);
    row.c.push_back(a.c);
  }
  return row;
}

inline std::uint64_t mask_at(const ExperimentConfig& cfg, double r) {
  return active_mask(solve_multi(cfg.instance_at("sweep-budget", r)));
}

}  // namespace detail

/// Solve across the budget grid and refine every active-set change to a
/// +-kBoundaryResolution bracket by bisection on the budget.
inline BudgetSweepResult sweep_budget(const ExperimentConfig& cfg,
                                      unsigned threads = 1) {
  if (!cfg.sweep_budget) {
    throw ConfigError("command \"sweep-budget\" requires a \"sweep_budget\" section");
  }
  const std::vector<double> grid = cfg.sweep_budget->r_grid.values();

  BudgetSweepResult result;
  result.rows = detail::indexed_map<BudgetRow>(
      grid.size(), threads,
      [&](std::size_t i) { return detail::budget_row(cfg, grid[i], 1); });

  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const std::uint64_t left = result.rows[i - 1].mask;
    std::uint64_t right = result.rows[i].mask;
    if (left == right) continue;
    double lo = result.rows[i - 1].budget;
    double hi = result.rows[i].budget;
    while (hi - lo > 2.0 * kBoundaryResolution) {
      const double mid = 0.5 * (lo + hi);
      const std::uint64_t mid_mask = detail::mask_at(cfg, mid);
      if (mid_mask == left) {
        lo = mid;
      } else {
        hi = mid;
        right = mid_mask;
      }
    }
    result.boundaries.push_back({0.5 * (lo + hi), left, right});
  }
  return result;
}

inline std::vector<std::size_t> mask_to_indices(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 64; ++i) {
    if ((mask >> i) & 1u) out.push_back(i + 1);
  }
  return out;
}

inline json to_json(const BudgetSweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"R", row.budget},
                    {"sender_utility", row.sender_utility},
                    {"receiver_utility", row.receiver_utility},
                    {"active_set", mask_to_indices(row.mask)},
                    {"mask", row.mask},
                    {"s", row.s},
                    {"c", row.c}});
  }
  json boundaries = json::array();
  for (const auto& b : result.boundaries) {
    boundaries.push_back({{"R", b.budget},
                          {"from", mask_to_indices(b.from_mask)},
                          {"to", mask_to_indices(b.to_mask)}});
  }
  return {{"rows", rows}, {"boundaries", boundaries}};
}

inline void write_csv(const BudgetSweepResult& result, std::ostream& os) {
  const std::size_t n = result.rows.empty() ? 0 : result.rows.front().s.size();
  os << "R,sender_utility,receiver_utility,active_set";
  for (std::size_t i = 1; i <= n; ++i) os << ",s_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",c_" << i;
  os << '\n';
  for (const auto& row : result.rows) {
    os << format_double(row.budget) << ',' << format_double(row.sender_utility)
       << ',' << format_double(row.receiver_utility) << ',' << row.mask;
    for (double v : row.s) os << ',' << format_double(v);
    for (double v : row.c) os << ',' << format_double(v);
    os << '\n';
  }
  for (const auto& b : result.boundaries) {
    os << "# boundary R=" << format_double(b.budget) << " from=" << b.from_mask
       << " to=" << b.to_mask << '\n';
  }
}

// ---------------------------------------------------------------------------
// sweep-heterogeneity
// ---------------------------------------------------------------------------

/// Spread a total of `total` across n rates, each >= 1, skewed by k:
/// mu_i = 1 + (total - n) * k^i / sum_j k^j for i = 1..n. k = 1 is the
/// uniform profile; smaller k tilts mass toward the first sources.
inline std::vector<double> heterogeneity_profile(std::size_t n, double total,
                                                 double k) {
  if (n < 1 || !(std::isfinite(total) && total > static_cast<double>(n))) {
    throw InvalidProfile("need n >= 1 and total > n");
  }
  if (!(k > 0.0 && k <= 1.0)) {
    throw InvalidProfile("skew k must lie in (0, 1]");
  }
  double power = 1.0;
  double sum = 0.0;
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    power *= k;
    weights[i] = power;
    sum += power;
  }
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = 1.0 + (total - static_cast<double>(n)) * weights[i] / sum;
  }
  return mu;
}

struct HeterogeneityRow {
  double k = 0.0;
  std::vector<double> mu;
  double sender_utility = 0.0;
  double receiver_utility = 0.0;
};

struct HeterogeneitySweepResult {
  std::vector<HeterogeneityRow> rows;
};

inline HeterogeneitySweepResult sweep_heterogeneity(const ExperimentConfig& cfg,
                                                    unsigned threads = 1) {
  if (!cfg.sweep_heterogeneity) {
    throw ConfigError(
        "command \"sweep-heterogeneity\" requires a \"sweep_heterogeneity\" section");
  }
  const auto& section = *cfg.sweep_heterogeneity;
  const double budget = cfg.demand_budget("sweep-heterogeneity");
  const std::vector<double> ks = section.k_grid.values();

  auto row_at = [&](std::size_t idx) {
    HeterogeneityRow row;
    row.k = ks[idx];
    row.mu = heterogeneity_profile(section.n, section.total_mu, row.k);
    std::vector<SourceParams> sources;
    sources.reserve(section.n);
    for (double mu : row.mu) sources.emplace_back(section.lambda, mu);
    const ProblemInstance instance(sources, cfg.q, budget);
    const EquilibriumOutcome outcome = solve_multi(instance);
    row.sender_utility = outcome.sender_utility;
    row.receiver_utility = instance.default_utility_total();
    return row;
  };
  HeterogeneitySweepResult result;
  result.rows = detail::indexed_map<HeterogeneityRow>(ks.size(), threads, row_at);
  return result;
}

inline json to_json(const HeterogeneitySweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"k", row.k},
                    {"mu", row.mu},
                    {"sender_utility", row.sender_utility},
                    {"receiver_utility", row.receiver_utility}});
  }
  return {{"rows", rows}};
}

inline void write_csv(const HeterogeneitySweepResult& result, std::ostream& os) {
  const std::size_t n = result.rows.empty() ? 0 : result.rows.front().mu.size();
  os << "k";
  for (std::size_t i = 1; i <= n; ++i) os << ",mu_" << i;
  os << ",sender_utility,receiver_utility\n";
  for (const auto& row : result.rows) {
    os << format_double(row.k);
    for (double v : row.mu) os << ',' << format_double(v);
    os << ',' << format_double(row.sender_utility) << ','
       << format_double(row.receiver_utility) << '\n';
  }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulationRecord {
  std::size_t source_index = 0;  // 0-based here, 1-based in output
  const char* engine = "joint";
  double s = 0.0;
  double c = 0.0;
  SimulationResult result;
  bool has_closed_form = false;
  StationaryDistribution closed_form;
  double closed_form_sender = 0.0;
  double closed_form_receiver = 0.0;
  double receiver_hat = 0.0;
  double max_abs_occupancy_error = 0.0;
};

/// Run the configured engines per source. Rates default to the solved
/// equilibrium policy. Substream rule: source i on engine e draws from
/// derive_stream(seed, 2*i + e) with e = 0 for joint, 1 for physical.
inline std::vector<SimulationRecord> run_simulations(const ExperimentConfig& cfg,
                                                     unsigned threads = 1) {
  if (!cfg.simulate) {
    throw ConfigError("command \"simulate\" requires a \"simulate\" section");
  }
  const auto& section = *cfg.simulate;
  const auto& sources = cfg.demand_sources("simulate");

  std::vector<RateAllocation> rates;
  if (section.rates) {
    rates = *section.rates;
    if (rates.size() != sources.size()) {
      throw ConfigError("simulate.rates must list one {s, c} pair per source");
    }
  } else {
    const ProblemInstance instance(sources, cfg.q, cfg.demand_budget("simulate"));
    rates = solve_multi(instance, threads).policy.rates;
  }

  struct Job {
    std::size_t source;
    const char* engine;
    std::uint64_t stream;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    // simulate_joint rejects s = c = 0; the physical engine still covers
    // that policy (frozen estimate), so skip only the joint job.
    const bool degenerate = rates[i].s + rates[i].c <= 0.0;
    if (section.engine != SimEngine::Physical && !degenerate) {
      jobs.push_back({i, "joint", 2 * i});
    }
    if (section.engine != SimEngine::Joint) jobs.push_back({i, "physical", 2 * i + 1});
  }

  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    const SourceParams& src = sources[job.source];
    const double s = rates[job.source].s;
    const double c = rates[job.source].c;
    const std::uint64_t stream_seed = derive_stream(section.seed, job.stream);

    SimulationRecord rec;
    rec.source_index = job.source;
    rec.engine = job.engine;
    rec.s = s;
    rec.c = c;
    rec.result = job.engine[0] == 'j'
                     ? simulate_joint(src, s, c, section.horizon, stream_seed)
                     : simulate_physical(src, s, c, section.horizon, stream_seed);
    rec.receiver_hat = rec.result.receiver_utility_hat(cfg.q);
    if (s + c > 0.0) {
      rec.has_closed_form = true;
      rec.closed_form = joint_stationary(src, s, c);
      rec.closed_form_sender = sender_utility_term(src, s, c);
      rec.closed_form_receiver = receiver_utility(src, cfg.q, s, c);
      const double e00 = std::abs(rec.result.p00 - rec.closed_form.p00);
      const double e01 = std::abs(rec.result.p01 - rec.closed_form.p01);
      const double e10 = std::abs(rec.result.p10 - rec.closed_form.p10);
      const double e11 = std::abs(rec.result.p11 - rec.closed_form.p11);
      rec.max_abs_occupancy_error = std::max({e00, e01, e10, e11});
    }
    return rec;
  };

  return detail::indexed_map<SimulationRecord>(jobs.size(), threads, run_job);
}

inline json to_json(const std::vector<SimulationRecord>& records) {
  json out = json::array();
  for (const auto& rec : records) {
    json entry = {{"source", rec.source_index + 1},
                  {"engine", rec.engine},
                  {"s", rec.s},
                  {"c", rec.c},
                  {"horizon", rec.result.horizon},
                  {"seed", rec.result.seed},
                  {"events", rec.result.events},
                  {"occupancy",
                   {{"p00", rec.result.p00},
                    {"p01", rec.result.p01},
                    {"p10", rec.result.p10},
                    {"p11", rec.result.p11}}},
                  {"sender_utility_hat", rec.result.sender_utility_hat},
                  {"receiver_utility_hat", rec.receiver_hat}};
    if (rec.has_closed_form) {
      entry["closed_form"] = {{"p00", rec.closed_form.p00},
                              {"p01", rec.closed_form.p01},
                              {"p10", rec.closed_form.p10},
                              {"p11", rec.closed_form.p11},
                              {"sender_utility", rec.closed_form_sender},
                              {"receiver_utility", rec.closed_form_receiver}};
      entry["max_abs_occupancy_error"] = rec.max_abs_occupancy_error;
    } else {
      entry["closed_form"] = nullptr;
    }
    out.push_back(entry);
  }
  return out;
}

inline void write_csv(const std::vector<SimulationRecord>& records,
                      std::ostream& os) {
  os << "source,engine,s,c,horizon,seed,events,p00,p01,p10,p11,"
        "sender_utility_hat,receiver_utility_hat\n";
  for (const auto& rec : records) {
    os << rec.source_index + 1 << ',' << rec.engine << ','
       << format_double(rec.s) << ',' << format_double(rec.c) << ','
       << format_double(rec.result.horizon) << ',' << rec.result.seed << ','
       << rec.result.events << ',' << format_double(rec.result.p00) << ','
       << format_double(rec.result.p01) << ',' << format_double(rec.result.p10)
       << ',' << format_double(rec.result.p11) << ','
       << format_double(rec.result.sender_utility_hat) << ','
       << format_double(rec.receiver_hat) << '\n';
  }
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

struct OracleReport {
  GridSpec grid;
  OracleResult oracle;
  EquilibriumOutcome solver;
};

inline OracleReport run_oracle(const ExperimentConfig& cfg, unsigned threads = 1) {
  if (!cfg.oracle) {
    throw ConfigError("command \"oracle\" requires an \"oracle\" section");
  }
  const ProblemInstance instance = cfg.instance("oracle");
  OracleReport report;
  report.grid = cfg.oracle->grid;
  report.oracle = grid_oracle(instance, report.grid);
  report.solver = solve_multi(instance, threads);
  return report;
}

inline json to_json(const OracleReport& report) {
  json policy = json::array();
  for (const auto& a : report.oracle.policy.rates) {
    policy.push_back({{"s", a.s}, {"c", a.c}});
  }
  return {{"step", report.grid.step},
          {"oracle_utility", report.oracle.utility},
          {"oracle_policy", policy},
          {"solver_utility", report.solver.sender_utility},
          {"gap", report.solver.sender_utility - report.oracle.utility}};
}

inline void write_csv(const OracleReport& report, std::ostream& os) {
  const std::size_t n = report.oracle.policy.rates.size();
  os << "step,oracle_utility,solver_utility,gap";
  for (std::size_t i = 1; i <= n; ++i) os << ",s_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",c_" << i;
  os << '\n';
  os << format_double(report.grid.step) << ','
     << format_double(report.oracle.utility) << ','
     << format_double(report.solver.sender_utility) << ','
     << format_double(report.solver.sender_utility - report.oracle.utility);
  for (const auto& a : report.oracle.policy.rates) os << ',' << format_double(a.s);
  for (const auto& a : report.oracle.policy.rates) os << ',' << format_double(a.c);
  os << '\n';
}

}  // namespace persuasion
