#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chaosbsde/basis.hpp"
#include "chaosbsde/brownian.hpp"
#include "chaosbsde/chaos.hpp"
#include "chaosbsde/multiindex.hpp"

namespace chaosbsde {

/// Y_t = xi + int_t^T f(s, Y_s, Z_s) ds - int_t^T Z_s . dB_s
struct BsdeProblem {
  int dimension = 1;
  /// Generator f(t, y, z), z of size d.
  std::function<double(double, double, std::span<const double>)> driver;
  /// Terminal functional of the grid Brownian path (after correlation, if any).
  std::function<double(const BrownianPath&)> terminal;
};

enum class EstimationMethod { EmpiricalMean, LeastSquares };
/// Same: coefficients estimated on the evaluation samples (the practical choice).
/// Fresh: coefficients estimated on an independent panel of M samples.
enum class SampleMode { Same, Fresh };
/// RightEndpoint: h sum_{i=1}^{j} f(t_i, ...). Trapezoidal: h sum (f_{i-1} + f_i) / 2.
enum class Quadrature { RightEndpoint, Trapezoidal };

struct SolverConfig {
  int iterations = 1;  // K_it
  ChaosBasis basis;    // T, N, d, p
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  EstimationMethod method = EstimationMethod::EmpiricalMean;
  SampleMode sample_mode = SampleMode::Same;
  Quadrature quadrature = Quadrature::RightEndpoint;
  double ridge = 0.0;
  std::optional<CorrelationSpec> correlation;
  int threads = 0;  // 0 = all cores
  std::size_t universe_cap = IndexUniverse::kDefaultSizeCap;

  /// Throws ConfigError.
  void validate() const;
};

/// Y (M x (N+1)) and Z (M x (N+1) x d) on the time grid.
struct PathGrid {
  std::size_t samples = 0;
  int steps = 0;
  int dimension = 0;
  std::vector<double> y;
  std::vector<double> z;

  PathGrid() = default;
  PathGrid(std::size_t samples, int steps, int dimension);

  double& y_at(std::size_t m, int node) { return y[m * row_y() + static_cast<std::size_t>(node)]; }
  double y_at(std::size_t m, int node) const { return y[m * row_y() + static_cast<std::size_t>(node)]; }
  double z_at(std::size_t m, int node, int l) const {
    return z[m * row_z() + static_cast<std::size_t>(node * dimension + l)];
  }
  std::size_t row_y() const { return static_cast<std::size_t>(steps) + 1; }
  std::size_t row_z() const { return row_y() * static_cast<std::size_t>(dimension); }
};

struct IterationTrace {
  int iteration = 0;  // q + 1: the iterate this row describes
  double y0 = 0.0;
  /// Sample standard deviation of F^q over sqrt(M): the Monte Carlo
  /// standard error of y0 = mean(F^q).
  double y0_std_error = 0.0;
  std::vector<double> z0;
  double estimate_seconds = 0.0;
  double update_seconds = 0.0;
  double wall_seconds = 0.0;  // since the start of the solve
};

struct SolverState {
  int iteration = 0;
  PathGrid grid;
  /// Fresh-sample mode: the iterate on the estimation panel, which feeds F^q.
  std::optional<PathGrid> estimation_grid;
  /// Decomposition of the last F^q; absent at iteration 0.
  std::optional<ChaosCoefficients> coefficients;
  std::vector<IterationTrace> traces;
  double setup_seconds = 0.0;
};

/// Picard iteration on chaos decompositions. Construction draws the sample
/// panel(s), builds the index universe and evaluates the terminal condition;
/// step() applies one iteration to all M trajectories.
class PicardSolver {
 public:
  PicardSolver(BsdeProblem problem, SolverConfig config);

  const SolverConfig& config() const { return config_; }
  const IndexUniverse& universe() const { return universe_; }
  /// Panel the reported trajectories live on.
  const SamplePanel& panel() const { return panel_; }
  const std::optional<SamplePanel>& estimation_panel() const { return estimation_panel_; }
  std::span<const double> terminal_values() const { return xi_; }

  /// Iteration 0: Y = 0, Z = 0.
  SolverState initial_state() const;

  /// One Picard iteration q -> q + 1.
  SolverState step(SolverState state) const;

  /// K_it iterations from the zero state; `on_iteration` sees each new state.
  SolverState solve(const std::function<void(const SolverState&)>& on_iteration = {}) const;

 private:
  std::vector<double> compute_terminal(const SamplePanel& panel) const;
  std::vector<double> compute_targets(const PathGrid& grid, std::span<const double> xi, int q) const;
  void update_grid(PathGrid& grid, const SamplePanel& panel, const ChaosCoefficients& coeffs) const;
  double driver_checked(double t, double y, std::span<const double> z) const;

  BsdeProblem problem_;
  SolverConfig config_;
  IndexUniverse universe_;
  SamplePanel panel_;
  std::optional<SamplePanel> estimation_panel_;
  std::vector<double> xi_;
  std::vector<double> estimation_xi_;
  double max_abs_xi_ = 0.0;
  double setup_seconds_ = 0.0;
};

SolverState solve(const BsdeProblem& problem, const SolverConfig& config);

}  // namespace chaosbsde
