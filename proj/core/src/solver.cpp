#include "chaosbsde/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kFreshPanelStream = 0x4652455348ULL;
constexpr double kBlowupFactor = 1e6;

double standard_error(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1) / n);
}

SolverConfig validated(SolverConfig config) {
  config.validate();
  return config;
}

}  // namespace

void SolverConfig::validate() const {
  basis.validate();
  if (iterations < 1) throw ConfigError("solver: iterations (K_it) must be >= 1");
  if (samples < 1) throw ConfigError("solver: sample count M must be >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("solver: ridge must be >= 0");
  if (threads < 0) throw ConfigError("solver: threads must be >= 0");
  if (correlation && correlation->dimension() != basis.dimension) {
    throw ConfigError("solver: correlation dimension does not match the Brownian dimension");
  }
}

PathGrid::PathGrid(std::size_t samples_, int steps_, int dimension_)
    : samples(samples_),
      steps(steps_),
      dimension(dimension_),
      y(samples_ * (static_cast<std::size_t>(steps_) + 1), 0.0),
      z(samples_ * (static_cast<std::size_t>(steps_) + 1) * static_cast<std::size_t>(dimension_), 0.0) {}

PicardSolver::PicardSolver(BsdeProblem problem, SolverConfig config)
    : problem_(std::move(problem)),
      config_(validated(std::move(config))),
      universe_(config_.basis, config_.universe_cap),
      panel_(sample_panel(config_.samples, config_.basis, config_.seed, config_.threads)) {
  const auto start = Clock::now();
  if (problem_.dimension != config_.basis.dimension) {
    throw ConfigError("solver: problem dimension " + std::to_string(problem_.dimension) +
                      " does not match basis dimension " + std::to_string(config_.basis.dimension));
  }
  if (!problem_.driver || !problem_.terminal) throw ConfigError("solver: problem needs a driver and a terminal");
  if (config_.method == EstimationMethod::LeastSquares && config_.samples <= universe_.size() + 1) {
    throw ConfigError("solver: least-squares estimation needs M > " + std::to_string(universe_.size() + 1));
  }
  xi_ = compute_terminal(panel_);
  if (config_.sample_mode == SampleMode::Fresh) {
    estimation_panel_ = sample_panel(config_.samples, config_.basis, mix_seed(config_.seed, kFreshPanelStream),
                                     config_.threads);
    estimation_xi_ = compute_terminal(*estimation_panel_);
  }
  for (double v : xi_) max_abs_xi_ = std::max(max_abs_xi_, std::abs(v));
  for (double v : estimation_xi_) max_abs_xi_ = std::max(max_abs_xi_, std::abs(v));
  setup_seconds_ = seconds_since(start);
}

std::vector<double> PicardSolver::compute_terminal(const SamplePanel& panel) const {
  std::optional<SamplePanel> correlated;
  if (config_.correlation) correlated = correlate(panel, *config_.correlation);
  const SamplePanel& source = correlated ? *correlated : panel;
  const auto M = static_cast<std::int64_t>(source.samples());
  std::vector<double> xi(source.samples());
#pragma omp parallel num_threads(resolve_threads(config_.threads))
  {
    BrownianPath path(source.steps(), source.dimension(), source.step_size());
#pragma omp for schedule(static)
    for (std::int64_t m = 0; m < M; ++m) {
      brownian_path(source, static_cast<std::size_t>(m), path);
      xi[static_cast<std::size_t>(m)] = problem_.terminal(path);
    }
  }
  for (std::size_t m = 0; m < xi.size(); ++m) {
    if (!std::isfinite(xi[m])) throw DataError("terminal condition is not finite at sample " + std::to_string(m));
  }
  return xi;
}

SolverState PicardSolver::initial_state() const {
  SolverState state;
  state.grid = PathGrid(config_.samples, config_.basis.steps, config_.basis.dimension);
  if (estimation_panel_) state.estimation_grid = state.grid;
  state.setup_seconds = setup_seconds_;
  return state;
}

std::vector<double> PicardSolver::compute_targets(const PathGrid& grid, std::span<const double> xi, int q) const {
  const int N = config_.basis.steps;
  const int d = config_.basis.dimension;
  const double h = config_.basis.step_size();
  const bool trapezoid = config_.quadrature == Quadrature::Trapezoidal;
  const auto M = static_cast<std::int64_t>(grid.samples);
  std::vector<double> targets(grid.samples);

  auto integral = [&](std::size_t m, int* bad_node) {
    const double* y = grid.y.data() + m * grid.row_y();
    const double* z = grid.z.data() + m * grid.row_z();
    double sum = 0.0;
    double prev = trapezoid ? problem_.driver(0.0, y[0], std::span<const double>(z, static_cast<std::size_t>(d))) : 0.0;
    for (int i = 1; i <= N; ++i) {
      const double f = problem_.driver(i * h, y[i], std::span<const double>(z + i * d, static_cast<std::size_t>(d)));
      if (bad_node && !std::isfinite(f) && *bad_node < 0) *bad_node = i;
      sum += trapezoid ? 0.5 * (prev + f) : f;
      prev = f;
    }
    return h * sum;
  };

#pragma omp parallel for num_threads(resolve_threads(config_.threads)) schedule(static)
  for (std::int64_t m = 0; m < M; ++m) {
    targets[static_cast<std::size_t>(m)] = xi[static_cast<std::size_t>(m)] + integral(static_cast<std::size_t>(m), nullptr);
  }
  for (std::size_t m = 0; m < targets.size(); ++m) {
    if (!std::isfinite(targets[m])) {
      int node = -1;
      integral(m, &node);
      std::ostringstream msg;
      msg << "numerical blow-up: F^q is not finite at iteration q=" << q << ", sample m=" << m
          << ", grid node j=" << node;
      throw NumericalError(msg.str());
    }
  }
  return targets;
}

void PicardSolver::update_grid(PathGrid& grid, const SamplePanel& panel, const ChaosCoefficients& coeffs) const {
  const int N = config_.basis.steps;
  const int d = config_.basis.dimension;
  const double h = config_.basis.step_size();
  const bool trapezoid = config_.quadrature == Quadrature::Trapezoidal;
  const auto M = static_cast<std::int64_t>(grid.samples);

#pragma omp parallel num_threads(resolve_threads(config_.threads))
  {
    HermiteTable table(config_.basis);
    std::vector<double> y(static_cast<std::size_t>(N) + 1);
    std::vector<double> z((static_cast<std::size_t>(N) + 1) * static_cast<std::size_t>(d));
    std::vector<double> running(static_cast<std::size_t>(N) + 1);
#pragma omp for schedule(static)
    for (std::int64_t mi = 0; mi < M; ++mi) {
      const auto m = static_cast<std::size_t>(mi);
      double* row_y = grid.y.data() + m * grid.row_y();
      double* row_z = grid.z.data() + m * grid.row_z();
      // Running integral h sum_{i<=j} f(t_i, Y^q, Z^q) from the previous iterate.
      double prev = trapezoid ? problem_.driver(0.0, row_y[0], std::span<const double>(row_z, static_cast<std::size_t>(d))) : 0.0;
      double sum = 0.0;
      running[0] = 0.0;
      for (int i = 1; i <= N; ++i) {
        const double f = problem_.driver(i * h, row_y[i], std::span<const double>(row_z + i * d, static_cast<std::size_t>(d)));
        sum += trapezoid ? 0.5 * (prev + f) : f;
        prev = f;
        running[static_cast<std::size_t>(i)] = h * sum;
      }
      table.assign(panel.row(m));
      grid_projections(coeffs, universe_, table, y, z);
      for (int j = 0; j <= N; ++j) row_y[j] = y[static_cast<std::size_t>(j)] - running[static_cast<std::size_t>(j)];
      std::copy(z.begin(), z.end(), row_z);
    }
  }
}

SolverState PicardSolver::step(SolverState state) const {
  const int q = state.iteration;
  const auto t0 = Clock::now();
  PathGrid& source_grid = estimation_panel_ ? *state.estimation_grid : state.grid;
  const SamplePanel& source_panel = estimation_panel_ ? *estimation_panel_ : panel_;
  std::span<const double> source_xi = estimation_panel_ ? std::span<const double>(estimation_xi_) : std::span<const double>(xi_);
  if (source_grid.samples != source_panel.samples()) throw DataError("picard_step: state does not match the panel");

  const std::vector<double> targets = compute_targets(source_grid, source_xi, q);
  ChaosCoefficients coeffs = config_.method == EstimationMethod::LeastSquares
                                 ? estimate_coefficients_saa(targets, source_panel, universe_, config_.ridge)
                                 : estimate_coefficients(targets, source_panel, universe_, {config_.threads});
  const double estimate_seconds = seconds_since(t0);

  const auto t1 = Clock::now();
  update_grid(state.grid, panel_, coeffs);
  if (estimation_panel_) update_grid(*state.estimation_grid, *estimation_panel_, coeffs);
  const double update_seconds = seconds_since(t1);

  const double limit = kBlowupFactor * (1.0 + max_abs_xi_);
  for (std::size_t k = 0; k < state.grid.y.size(); ++k) {
    const double v = state.grid.y[k];
    if (!(std::abs(v) <= limit)) {
      std::ostringstream msg;
      msg << "numerical blow-up: |Y| = " << std::abs(v) << " exceeds " << limit << " at iteration q=" << q
          << ", sample m=" << k / state.grid.row_y() << ", grid node j=" << k % state.grid.row_y();
      throw NumericalError(msg.str());
    }
  }

  IterationTrace trace;
  trace.iteration = q + 1;
  trace.y0 = state.grid.y_at(0, 0);
  trace.y0_std_error = standard_error(targets);
  trace.z0.resize(static_cast<std::size_t>(config_.basis.dimension));
  for (int l = 0; l < config_.basis.dimension; ++l) trace.z0[static_cast<std::size_t>(l)] = state.grid.z_at(0, 0, l);
  trace.estimate_seconds = estimate_seconds;
  trace.update_seconds = update_seconds;
  trace.wall_seconds = (state.traces.empty() ? state.setup_seconds : state.traces.back().wall_seconds) +
                       estimate_seconds + update_seconds;
  state.traces.push_back(std::move(trace));
  state.coefficients = std::move(coeffs);
  state.iteration = q + 1;
  return state;
}

SolverState PicardSolver::solve(const std::function<void(const SolverState&)>& on_iteration) const {
  SolverState state = initial_state();
  for (int q = 0; q < config_.iterations; ++q) {
    state = step(std::move(state));
    if (on_iteration) on_iteration(state);
  }
  return state;
}

SolverState solve(const BsdeProblem& problem, const SolverConfig& config) {
  return PicardSolver(problem, config).solve();
}

}  // namespace chaosbsde
