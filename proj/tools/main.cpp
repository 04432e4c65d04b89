#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"

using namespace chaosbsde::cli;

int main(int argc, char** argv) {
  CLI::App app{"Picard BSDE solver on truncated Wiener chaos expansions"};
  app.require_subcommand(1);

  SolveOptions solve_opts;
  std::string solve_config;
  std::string solve_out;
  int solve_threads = -1;
  auto* solve = app.add_subcommand("solve", "Run one solve and write trace.csv and summary.json");
  solve->add_option("config", solve_config, "INI config file")->required();
  solve->add_option("-o,--out", solve_out, "Output directory (overrides config and $" + std::string(kOutputDirEnv) + ")");
  solve->add_option("-t,--threads", solve_threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  solve->add_flag("-q,--quiet", solve_opts.quiet, "No per-iteration progress");

  SweepOptions sweep_opts;
  std::string sweep_config;
  std::string sweep_out;
  int sweep_threads = -1;
  auto* sweep = app.add_subcommand("sweep", "One solve per axis value, collected in sweep.csv");
  sweep->add_option("config", sweep_config, "INI config file")->required();
  sweep->add_option("--axis", sweep_opts.axis, "Axis to vary")->required()->check(CLI::IsMember({"M", "N", "p", "q"}));
  sweep->add_option("--values", sweep_opts.values, "Comma-separated axis values")->required()->delimiter(',');
  sweep->add_option("-o,--out", sweep_out, "Output directory");
  sweep->add_option("-t,--threads", sweep_threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

  ValidateOptions validate_opts;
  std::string validate_m;
  auto* validate = app.add_subcommand("validate", "Compare the solver with reference values");
  validate->add_flag("--fast", validate_opts.fast, "Smaller sample sizes");
  validate->add_option("--M", validate_m, "Sample count for every statistical check");
  validate->add_option("--seed", validate_opts.seed, "Seed");
  validate->add_option("-t,--threads", validate_opts.threads, "Worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber);

  std::string oracle_name;
  std::vector<std::string> oracle_params;
  auto* oracle = app.add_subcommand("oracle", "Reference price: linear, barrier_call or basket_put");
  oracle->add_option("name", oracle_name, "Oracle name")->required();
  oracle->add_option("params", oracle_params, "key=value parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  return guarded(
      [&]() -> int {
        if (*solve) {
          solve_opts.output_dir = solve_out;
          if (solve_threads >= 0) solve_opts.threads = solve_threads;
          return cmd_solve(solve_config, solve_opts, std::cout, std::cerr);
        }
        if (*sweep) {
          sweep_opts.output_dir = sweep_out;
          if (sweep_threads >= 0) sweep_opts.threads = sweep_threads;
          return cmd_sweep(sweep_config, sweep_opts, std::cout, std::cerr);
        }
        if (*validate) {
          if (!validate_m.empty()) validate_opts.samples = parse_count("M", validate_m);
          return cmd_validate(validate_opts, std::cout, std::cerr);
        }
        return cmd_oracle(oracle_name, oracle_params, std::cout, std::cerr);
      },
      std::cerr);
}
