#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "persuasion/model.hpp"
#include "persuasion/oracle.hpp"

namespace persuasion {

using json = nlohmann::json;

/// Inclusive arithmetic grid start, start+step, ..., stop.
struct GridRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  void validate(const std::string& where) const {
    if (!(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step)) ||
        step <= 0.0 || stop < start) {
      throw ConfigError(where + ": need finite start <= stop and step > 0");
    }
  }

  std::vector<double> values() const {
    std::vector<double> out;
    // Absorb float drift so the endpoint lands on the grid when it should.
    const double slack = step * 1e-9;
    for (std::size_t k = 0;; ++k) {
      const double v = start + static_cast<double>(k) * step;
      if (v > stop + slack) break;
      out.push_back(v < stop ? v : stop);
    }
    return out;
  }
};

struct BudgetSweepSection {
  GridRange r_grid;
};

struct HeterogeneitySweepSection {
  std::size_t n = 0;
  double total_mu = 0.0;
  double lambda = 1.0;
  GridRange k_grid;
};

enum class SimEngine { Joint, Physical, Both };

struct SimulateSection {
  double horizon = 1e6;
  std::uint64_t seed = 1;
  SimEngine engine = SimEngine::Both;
  std::optional<std::vector<RateAllocation>> rates;  // default: solved policy
};

struct OracleSection {
  GridSpec grid;
};

namespace detail {

inline std::string json_type_name(const json& j) { return j.type_name(); }

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(where + ": expected an object, got " + obj.type_name());
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) { known = true; break; }
    }
    if (!known) {
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline const json& require(const json& obj, const std::string& where,
                           const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(where + ": missing required key \"" + key + "\"");
  }
  return *it;
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) {
    throw ConfigError(where + ": expected a number, got " + json_type_name(j));
  }
  return j.get<double>();
}

inline std::uint64_t as_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + ": expected a non-negative integer, got " + j.dump());
  }
  return j.get<std::uint64_t>();
}

inline GridRange parse_grid(const json& obj, const std::string& where,
                            const char* start_key, const char* stop_key,
                            const char* step_key) {
  GridRange grid;
  grid.start = as_number(require(obj, where, start_key), where + "." + start_key);
  grid.stop = as_number(require(obj, where, stop_key), where + "." + stop_key);
  grid.step = as_number(require(obj, where, step_key), where + "." + step_key);
  grid.validate(where);
  return grid;
}

// Translate a nlohmann byte offset into "line L, column C" for error
// messages that point at the offending spot.
inline std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') { ++line; column = 1; } else { ++column; }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

/// Parsed, validated experiment description. Which pieces are required
/// depends on the command; handlers call the demand_* accessors.
struct ExperimentConfig {
  std::optional<std::vector<SourceParams>> sources;
  double q = 0.5;
  std::optional<double> budget;
  std::optional<BudgetSweepSection> sweep_budget;
  std::optional<HeterogeneitySweepSection> sweep_heterogeneity;
  std::optional<SimulateSection> simulate;
  std::optional<OracleSection> oracle;

  const std::vector<SourceParams>& demand_sources(const std::string& cmd) const {
    if (!sources) {
      throw ConfigError("command \"" + cmd + "\" requires top-level \"sources\"");
    }
    return *sources;
  }

  double demand_budget(const std::string& cmd) const {
    if (!budget) {
      throw ConfigError("command \"" + cmd + "\" requires top-level \"budget\"");
    }
    return *budget;
  }

  /// Instance at the configured budget (or an override, for sweeps).
  ProblemInstance instance(const std::string& cmd) const {
    return ProblemInstance(demand_sources(cmd), q, demand_budget(cmd));
  }
  ProblemInstance instance_at(const std::string& cmd, double r) const {
    return ProblemInstance(demand_sources(cmd), q, r);
  }

  static ExperimentConfig parse(const json& root);
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
};

inline ExperimentConfig ExperimentConfig::parse(const json& root) {
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  detail::reject_unknown_keys(root, "config",
                              {"sources", "q", "budget", "sweep_budget",
                               "sweep_heterogeneity", "simulate", "oracle"});

  ExperimentConfig cfg;
  cfg.q = detail::as_number(detail::require(root, "config", "q"), "config.q");
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) {
    throw ConfigError("config.q: receiver weight must lie in (0, 1)");
  }

  if (auto it = root.find("budget"); it != root.end()) {
    cfg.budget = detail::as_number(*it, "config.budget");
    if (!(*cfg.budget >= 0.0)) {
      throw ConfigError("config.budget: must be >= 0");
    }
  }

  if (auto it = root.find("sources"); it != root.end()) {
    if (!it->is_array() || it->empty()) {
      throw ConfigError("config.sources: expected a non-empty array");
    }
    std::vector<SourceParams> sources;
    std::size_t idx = 0;
    for (const auto& entry : *it) {
      const std::string where = "config.sources[" + std::to_string(idx) + "]";
      if (!entry.is_object()) {
        throw ConfigError(where + ": expected an object {lambda, mu}");
      }
      detail::reject_unknown_keys(entry, where, {"lambda", "mu"});
      const double lambda = detail::as_number(detail::require(entry, where, "lambda"),
                                              where + ".lambda");
      const double mu = detail::as_number(detail::require(entry, where, "mu"),
                                          where + ".mu");
      sources.emplace_back(lambda, mu);
      ++idx;
    }
    // Probe instance: trips InvalidInstance now if the default-estimate
    // assumption fails for any source.
    (void)ProblemInstance(sources, cfg.q, 0.0);
    cfg.sources = std::move(sources);
  }

  if (auto it = root.find("sweep_budget"); it != root.end()) {
    const std::string where = "config.sweep_budget";
    detail::reject_unknown_keys(*it, where, {"start", "stop", "step"});
    cfg.sweep_budget = BudgetSweepSection{
        detail::parse_grid(*it, where, "start", "stop", "step")};
  }

  if (auto it = root.find("sweep_heterogeneity"); it != root.end()) {
    const std::string where = "config.sweep_heterogeneity";
    detail::reject_unknown_keys(*it, where,
                                {"n", "total_mu", "lambda", "k_start", "k_stop", "k_step"});
    HeterogeneitySweepSection section;
    section.n = static_cast<std::size_t>(
        detail::as_u64(detail::require(*it, where, "n"), where + ".n"));
    section.total_mu = detail::as_number(detail::require(*it, where, "total_mu"),
                                         where + ".total_mu");
    if (auto l = it->find("lambda"); l != it->end()) {
      section.lambda = detail::as_number(*l, where + ".lambda");
    }
    section.k_grid = detail::parse_grid(*it, where, "k_start", "k_stop", "k_step");
    if (!(section.k_grid.start > 0.0 && section.k_grid.stop <= 1.0)) {
      throw ConfigError(where + ": k grid must lie inside (0, 1]");
    }
    cfg.sweep_heterogeneity = section;
  }

  if (auto it = root.find("simulate"); it != root.end()) {
    const std::string where = "config.simulate";
    detail::reject_unknown_keys(*it, where, {"horizon", "seed", "engine", "rates"});
    SimulateSection section;
    section.horizon = detail::as_number(detail::require(*it, where, "horizon"),
                                        where + ".horizon");
    if (!(section.horizon > 0.0)) {
      throw ConfigError(where + ".horizon: must be positive");
    }
    if (auto s = it->find("seed"); s != it->end()) {
      section.seed = detail::as_u64(*s, where + ".seed");
    }
    if (auto e = it->find("engine"); e != it->end()) {
      const std::string name = e->is_string() ? e->get<std::string>() : e->dump();
      if (name == "joint") section.engine = SimEngine::Joint;
      else if (name == "physical") section.engine = SimEngine::Physical;
      else if (name == "both") section.engine = SimEngine::Both;
      else throw ConfigError(where + ".engine: expected joint|physical|both");
    }
    if (auto r = it->find("rates"); r != it->end()) {
      if (!r->is_array()) {
        throw ConfigError(where + ".rates: expected an array of {s, c}");
      }
      std::vector<RateAllocation> rates;
      std::size_t idx = 0;
      for (const auto& entry : *r) {
        const std::string rw = where + ".rates[" + std::to_string(idx) + "]";
        detail::reject_unknown_keys(entry, rw, {"s", "c"});
        rates.push_back({detail::as_number(detail::require(entry, rw, "s"), rw + ".s"),
                         detail::as_number(detail::require(entry, rw, "c"), rw + ".c")});
        ++idx;
      }
      section.rates = RatePolicy(rates).rates;  // runs range validation
    }
    cfg.simulate = section;
  }

  if (auto it = root.find("oracle"); it != root.end()) {
    const std::string where = "config.oracle";
    detail::reject_unknown_keys(*it, where, {"step", "max_sources"});
    OracleSection section;
    section.grid.step = detail::as_number(detail::require(*it, where, "step"),
                                          where + ".step");
    if (!(section.grid.step > 0.0)) {
      throw ConfigError(where + ".step: must be positive");
    }
    if (auto m = it->find("max_sources"); m != it->end()) {
      section.grid.max_sources = static_cast<std::size_t>(
          detail::as_u64(*m, where + ".max_sources"));
      if (section.grid.max_sources < 1) {
        throw ConfigError(where + ".max_sources: must be >= 1");
      }
    }
    cfg.oracle = section;
  }

  return cfg;
}

inline ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + detail::locate(text, e.byte) +
                      ": " + e.what());
  }
  return parse(root);
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

}  // namespace persuasion
