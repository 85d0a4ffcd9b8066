// Command-line front end: loads a JSON experiment config, runs one of the
// solvers / sweeps / simulators, and emits machine-readable results.
//
// Exit codes: 0 success, 2 config or validation error, 3 internal
// numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "persuasion/persuasion.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::string output_path;  // empty = stdout
  std::string format = "";  // per-command default when empty
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Path to the JSON experiment config")
      ->required();
  cmd->add_option("--output", opts.output_path,
                  "Output file (default: standard output)");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", opts.seed, "Override the simulation seed");
  cmd->add_option("--threads", opts.threads, "Worker threads for independent solves")
      ->check(CLI::Range(1u, 256u));
}

void emit(const std::string& text, const CommonOptions& opts) {
  if (opts.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.output_path, std::ios::binary);
  if (!out) {
    throw persuasion::ConfigError("cannot open output file: " + opts.output_path);
  }
  out << text;
}

template <typename Report>
void emit_report(const Report& report, const CommonOptions& opts,
                 const char* default_format) {
  const std::string format = opts.format.empty() ? default_format : opts.format;
  if (format == "json") {
    emit(persuasion::to_json(report).dump(2) + "\n", opts);
  } else {
    std::ostringstream os;
    persuasion::write_csv(report, os);
    emit(os.str(), opts);
  }
}

int run(const std::string& command, const CommonOptions& opts) {
  using namespace persuasion;
  ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);

  if (command == "solve") {
    emit_report(run_solve(cfg.instance("solve"), opts.threads), opts, "json");
  } else if (command == "sweep-budget") {
    emit_report(sweep_budget(cfg, opts.threads), opts, "csv");
  } else if (command == "sweep-heterogeneity") {
    emit_report(sweep_heterogeneity(cfg, opts.threads), opts, "csv");
  } else if (command == "simulate") {
    if (opts.seed) {
      if (!cfg.simulate) {
        throw ConfigError("command \"simulate\" requires a \"simulate\" section");
      }
      cfg.simulate->seed = *opts.seed;
    }
    emit_report(run_simulations(cfg, opts.threads), opts, "json");
  } else {  // oracle
    emit_report(run_oracle(cfg, opts.threads), opts, "json");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal timing of state updates from binary Markov sources: "
               "equilibrium solvers, sweeps, simulators and a grid oracle"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string command;
  for (const char* name : {"solve", "sweep-budget", "sweep-heterogeneity",
                           "simulate", "oracle"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common_options(cmd, opts);
    cmd->callback([&command, name] { command = name; });
  }
  app.get_subcommand("solve")->description("Stackelberg optimum for the configured instance");
  app.get_subcommand("sweep-budget")->description("Re-solve across a budget grid; report active-set boundaries");
  app.get_subcommand("sweep-heterogeneity")->description("Re-solve across skewed mu profiles");
  app.get_subcommand("simulate")->description("Monte-Carlo check of the closed-form occupancies");
  app.get_subcommand("oracle")->description("Brute-force grid maximizer vs the analytical solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return run(command, opts);
  } catch (const persuasion::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const persuasion::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
