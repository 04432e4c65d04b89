#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "chaosbsde/problems.hpp"
#include "chaosbsde/solver.hpp"

namespace chaosbsde::cli {

/// One experiment: a problem, a solver configuration and output settings.
///
///   [problem]
///   name = cos_sup
///   include_origin = 0        ; any other key is a problem parameter
///
///   [solver]
///   M = 100000                ; required
///   N = 20                    ; required
///   p = 2                     ; required
///   iterations = 6            ; required
///   T = 1
///   seed = 12345
///   method = mean             ; mean | saa
///   sample_mode = same        ; same | fresh
///   quadrature = right        ; right | trapezoid
///   ridge = 0
///   threads = 0
///
///   [output]
///   dir = out
///   paths = false
///   coefficients = false
struct RunConfig {
  std::string problem;
  ProblemParams params;
  SolverConfig solver;
  std::filesystem::path output_dir;  // empty: resolved by the caller
  bool emit_paths = false;
  bool emit_coefficients = false;
};

/// Throws ConfigError with the offending line or key in the message.
RunConfig parse_run_config(std::istream& in, const std::string& source_name = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the problem and copies its correlation into the solver settings.
/// The basis dimension is taken from the problem.
ProblemInstance instantiate(RunConfig& config, const ProblemRegistry& registry);

/// Value parsers shared by the config reader and the command line. Counts
/// accept integral scientific notation (1e5). Throw ConfigError naming `key`.
double parse_real(const std::string& key, const std::string& value);
std::uint64_t parse_count(const std::string& key, const std::string& value);

std::string to_string(EstimationMethod method);
std::string to_string(SampleMode mode);
std::string to_string(Quadrature quadrature);

}  // namespace chaosbsde::cli
