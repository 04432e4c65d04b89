#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaosbsde/problems.hpp"
#include "chaosbsde/solver.hpp"
#include "run_config.hpp"

namespace chaosbsde::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kValidationFailure = 4 };

inline constexpr const char* kOutputDirEnv = "CHAOSBSDE_OUTPUT_DIR";

/// Command-line override, then the config's [output] dir, then
/// $CHAOSBSDE_OUTPUT_DIR, then the working directory.
std::filesystem::path resolve_output_dir(const std::filesystem::path& override_dir,
                                         const std::filesystem::path& config_dir);

/// Real numbers as written to every table: 17 significant digits, '.' separator.
std::string format_real(double x);

struct SolveOutcome {
  std::unique_ptr<PicardSolver> solver;
  ProblemInstance instance;
  SolverState state;
  std::vector<std::pair<std::string, double>> derived;
  double total_seconds = 0.0;
};

/// Instantiates the problem and runs all iterations; `on_iteration` sees each new state.
SolveOutcome run_solve(RunConfig& config, const ProblemRegistry& registry,
                       const std::function<void(const SolverState&)>& on_iteration = {});

void write_trace_header(std::ostream& out, int dimension);
void write_trace_row(std::ostream& out, const IterationTrace& trace);
void write_paths_csv(std::ostream& out, const PathGrid& grid);
/// Structured summary: final values, config echo, seed, derived outputs, timing.
std::string summary_json(const RunConfig& config, const SolveOutcome& outcome);

struct SolveOptions {
  std::filesystem::path output_dir;  // overrides the config
  std::optional<int> threads;
  bool quiet = false;
};
int cmd_solve(const std::filesystem::path& config_path, const SolveOptions& options, std::ostream& out,
              std::ostream& err);

struct SweepOptions {
  std::string axis;                 // M, N, p or q
  std::vector<std::string> values;  // one solve per value
  std::filesystem::path output_dir;
  std::optional<int> threads;
};
/// Seed of one sweep point: the base seed along q (so the points replay one
/// trace), a mix of base seed, axis and value otherwise.
std::uint64_t sweep_seed(std::uint64_t base, const std::string& axis, std::uint64_t value);
int cmd_sweep(const std::filesystem::path& config_path, const SweepOptions& options, std::ostream& out,
              std::ostream& err);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidateOptions {
  bool fast = false;
  std::optional<std::size_t> samples;  // overrides M of every statistical check
  std::uint64_t seed = 12345;
  int threads = 0;
};
std::vector<ValidationCheck> run_validation(const ValidateOptions& options,
                                            const std::function<void(const ValidationCheck&)>& on_check = {});
int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

/// `name` is linear, barrier_call or basket_put; params are key=value pairs.
int cmd_oracle(const std::string& name, const std::vector<std::string>& params, std::ostream& out,
               std::ostream& err);

/// Maps library exceptions to exit codes, printing the diagnostic to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace chaosbsde::cli
