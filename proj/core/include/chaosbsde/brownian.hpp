#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chaosbsde/basis.hpp"

namespace chaosbsde {

/// M x N x d standard normal increments G_i^j, sample-major then step then
/// component. Immutable once built.
class SamplePanel {
 public:
  SamplePanel(std::size_t samples, int steps, int dimension, double horizon, std::uint64_t seed,
              std::vector<double> values);

  std::size_t samples() const { return samples_; }
  int steps() const { return steps_; }
  int dimension() const { return dimension_; }
  double horizon() const { return horizon_; }
  double step_size() const { return horizon_ / steps_; }
  std::uint64_t seed() const { return seed_; }

  /// G_{step}^{component} of sample m, step in 1..N.
  double g(std::size_t m, int step, int component) const {
    return values_[(m * static_cast<std::size_t>(steps_) + static_cast<std::size_t>(step - 1)) *
                       static_cast<std::size_t>(dimension_) +
                   static_cast<std::size_t>(component)];
  }
  /// The N*d increments of sample m, step-major.
  std::span<const double> row(std::size_t m) const {
    const std::size_t width = static_cast<std::size_t>(steps_) * static_cast<std::size_t>(dimension_);
    return {values_.data() + m * width, width};
  }
  std::span<const double> values() const { return values_; }

  bool matches(const ChaosBasis& basis) const;

 private:
  std::size_t samples_;
  int steps_;
  int dimension_;
  double horizon_;
  std::uint64_t seed_;
  std::vector<double> values_;
};

struct PanelLimits {
  std::size_t max_bytes = std::size_t{4} << 30;
};

/// Draws M*N*d independent standard normals. Samples are generated in fixed
/// blocks, each from its own engine keyed by (seed, block), so the output is
/// a function of (M, N, d, T, seed) only, whatever the thread count.
SamplePanel sample_panel(std::size_t samples, const ChaosBasis& basis, std::uint64_t seed,
                         int threads = 0, PanelLimits limits = {});

struct PanelMoments {
  double worst_mean_deviation = 0.0;      // max |mean| over slots
  double worst_variance_deviation = 0.0;  // max |var - 1| over slots
  bool within_bands = true;               // 5/sqrt(M) and 5*sqrt(2/M)
};

/// Statistical sanity gate on a panel; a warning signal, not an error.
PanelMoments panel_moments(const SamplePanel& panel);

/// Grid values B_{t_i}^j, i = 0..N, of one sample.
class BrownianPath {
 public:
  BrownianPath() = default;
  BrownianPath(int steps, int dimension, double step_size);

  int steps() const { return steps_; }
  int dimension() const { return dimension_; }
  double step_size() const { return step_size_; }
  double operator()(int node, int component) const {
    return values_[static_cast<std::size_t>(node * dimension_ + component)];
  }
  double& operator()(int node, int component) {
    return values_[static_cast<std::size_t>(node * dimension_ + component)];
  }
  double time(int node) const { return node * step_size_; }

 private:
  int steps_ = 0;
  int dimension_ = 0;
  double step_size_ = 0.0;
  std::vector<double> values_;
};

BrownianPath brownian_path(const SamplePanel& panel, std::size_t m);
/// Reuses `out`'s storage; `out` is reshaped if needed.
void brownian_path(const SamplePanel& panel, std::size_t m, BrownianPath& out);

/// Constant-correlation structure C_ij = rho (i != j), 1 (i == j), with its
/// lower Cholesky factor.
class CorrelationSpec {
 public:
  /// Throws ConfigError unless -1/(d-1) < rho < 1.
  CorrelationSpec(double rho, int dimension);

  double rho() const { return rho_; }
  int dimension() const { return dimension_; }
  /// L_ij, row-major, lower triangular.
  double lower(int i, int j) const { return lower_[static_cast<std::size_t>(i * dimension_ + j)]; }
  double correlation(int i, int j) const { return i == j ? 1.0 : rho_; }

 private:
  double rho_;
  int dimension_;
  std::vector<double> lower_;
};

/// Replaces each d-vector of increments by L g.
SamplePanel correlate(const SamplePanel& panel, const CorrelationSpec& corr);

// Flat binary snapshot: u64 M, u64 N, u64 d, f64 T, u64 seed, then M*N*d f64
// in panel order; native (little-endian) byte order.
void write_panel(const SamplePanel& panel, std::ostream& out);
SamplePanel read_panel(std::istream& in);
void save_panel(const SamplePanel& panel, const std::string& path);
SamplePanel load_panel(const std::string& path);

/// splitmix64 finalizer; used to derive independent stream keys.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

int resolve_threads(int requested);

}  // namespace chaosbsde
