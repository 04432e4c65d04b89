#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaosbsde/brownian.hpp"
#include "chaosbsde/solver.hpp"

namespace chaosbsde {

// Terminal conditions and drivers of the benchmark problems, plus the
// Black-Scholes map from Brownian grid paths to asset prices.

/// max_i B_{t_i} over the grid nodes (d = 1). With `include_origin` the
/// node t_0 (where B = 0) takes part, so the result is >= 0; without it the
/// maximum runs over t_1..t_N only.
double terminal_sup_bm(const BrownianPath& path, bool include_origin = true);

double driver_cos(double t, double y, std::span<const double> z);

struct BlackScholesParams {
  std::vector<double> spot;    // S0 per asset
  std::vector<double> drift;   // mu per asset, 1/time
  std::vector<double> vol;     // sigma per asset, 1/sqrt(time)
  double rate = 0.0;           // r
  double borrow_rate = 0.0;    // R, basket problem only

  int assets() const { return static_cast<int>(spot.size()); }
  /// Throws ConfigError unless sizes agree and sigma > 0.
  void validate() const;
};

/// S^i_{t_k} = S^i_0 exp((mu^i - (sigma^i)^2 / 2) t_k + sigma^i B^i_{t_k}), k = 0..N.
class AssetPaths {
 public:
  AssetPaths(int steps, int assets) : steps_(steps), assets_(assets),
      values_(static_cast<std::size_t>((steps + 1) * assets)) {}
  int steps() const { return steps_; }
  int assets() const { return assets_; }
  double operator()(int node, int asset) const { return values_[static_cast<std::size_t>(node * assets_ + asset)]; }
  double& operator()(int node, int asset) { return values_[static_cast<std::size_t>(node * assets_ + asset)]; }
  /// Grid values of one asset.
  std::vector<double> asset(int i) const;

 private:
  int steps_;
  int assets_;
  std::vector<double> values_;
};

AssetPaths bs_path(const BrownianPath& path, const BlackScholesParams& params);

/// (S_T - K)^+ if S_{t_k} >= L at every node k = 0..N, else 0.
double terminal_barrier_call(std::span<const double> asset_grid, double strike, double barrier);

/// (K - mean_i S^i_T)^+
double terminal_basket_put(const AssetPaths& paths, double strike);

/// theta = Sigma^{-1}(mu - r 1) with Sigma_ij = sigma^i L_ij.
class BasketDriverSpec {
 public:
  /// Throws ConfigError if Sigma is singular or sizes disagree.
  BasketDriverSpec(const BlackScholesParams& params, const CorrelationSpec& corr);

  int dimension() const { return dimension_; }
  std::span<const double> theta() const { return theta_; }
  double sigma(int i, int j) const { return sigma_[static_cast<std::size_t>(i * dimension_ + j)]; }
  double sigma_inverse(int i, int j) const { return sigma_inv_[static_cast<std::size_t>(i * dimension_ + j)]; }
  /// sum_i (Sigma^{-1} z)_i
  double sum_sigma_inverse(std::span<const double> z) const;

 private:
  int dimension_;
  std::vector<double> sigma_;
  std::vector<double> sigma_inv_;
  std::vector<double> theta_;
  std::vector<double> column_sums_;  // 1^T Sigma^{-1}
};

/// f(t, y, z) = -r y - theta.z + (R - r)(y - sum_i (Sigma^{-1} z)_i)^-,  x^- = max(-x, 0).
double driver_borrowing(double t, double y, std::span<const double> z, const BasketDriverSpec& spec, double r,
                        double R);

/// A named problem, ready to hand to the solver.
struct ProblemInstance {
  std::string name;
  BsdeProblem problem;
  std::optional<CorrelationSpec> correlation;
  /// Extra named outputs derived from (Y_0, Z_0), e.g. deltas.
  std::function<std::vector<std::pair<std::string, double>>(double, std::span<const double>)> derived;
};

using ProblemParams = std::map<std::string, double>;

/// Problem factories keyed by name. Factories reject unknown parameter keys
/// with a ConfigError naming the key.
class ProblemRegistry {
 public:
  using Factory = std::function<ProblemInstance(const ProblemParams&)>;

  /// Registry holding cos_sup, barrier_call, basket_put, linear_test, martingale_test, zero_test.
  static ProblemRegistry builtin();

  void add(std::string name, Factory factory);
  bool contains(const std::string& name) const { return factories_.count(name) != 0; }
  ProblemInstance make(const std::string& name, const ProblemParams& params = {}) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Factory> factories_;
};

/// Parameters of the barrier benchmark: r = 0.01, sigma = 0.2, T = 1, K = 0.9, L = 0.85, S0 = 1.
struct BarrierCallParams {
  double spot = 1.0;
  double rate = 0.01;
  double vol = 0.2;
  double strike = 0.9;
  double barrier = 0.85;
};

/// Parameters of the 5-asset basket put: r = 0.02, R = 0.1, K = 95, rho = 0.1,
/// S0 = 100, mu = 0.05, sigma = 0.2.
struct BasketPutParams {
  int assets = 5;
  double spot = 100.0;
  double rate = 0.02;
  double borrow_rate = 0.1;
  double drift = 0.05;
  double vol = 0.2;
  double strike = 95.0;
  double rho = 0.1;

  BlackScholesParams market() const;
};

/// f = cos(y), xi = sup of B over the grid. The default monitors t_1..t_N;
/// `include_origin` adds t_0.
ProblemInstance make_cos_sup(bool include_origin = false);
ProblemInstance make_barrier_call(const BarrierCallParams& params);
ProblemInstance make_basket_put(const BasketPutParams& params);
/// f = -r y, xi = c.
ProblemInstance make_linear_test(double rate, double terminal_value);
/// f = 0, xi = B_T.
ProblemInstance make_martingale_test();
/// f = 0, xi = 0.
ProblemInstance make_zero_test(int dimension = 1);

}  // namespace chaosbsde
