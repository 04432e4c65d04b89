#include "chaosbsde/problems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

// Reads factory parameters and rejects keys nobody asked for.
class ParamReader {
 public:
  ParamReader(std::string problem, const ProblemParams& params) : problem_(std::move(problem)), params_(params) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  void finish() const {
    for (const auto& [key, value] : params_) {
      if (!used_.count(key)) throw ConfigError("problem " + problem_ + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string problem_;
  const ProblemParams& params_;
  std::set<std::string> used_;
};

int as_count(const std::string& problem, const std::string& key, double v) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 255.0) {
    throw ConfigError("problem " + problem + ": parameter '" + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

}  // namespace

double terminal_sup_bm(const BrownianPath& path, bool include_origin) {
  double best = include_origin ? path(0, 0) : path(1, 0);
  for (int i = 1; i <= path.steps(); ++i) best = std::max(best, path(i, 0));
  return best;
}

double driver_cos(double /*t*/, double y, std::span<const double> /*z*/) { return std::cos(y); }

void BlackScholesParams::validate() const {
  const std::size_t n = spot.size();
  if (n == 0 || drift.size() != n || vol.size() != n) {
    throw ConfigError("black-scholes: spot, drift and vol must have one entry per asset");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(vol[i] > 0.0)) throw ConfigError("black-scholes: sigma must be positive");
    if (!(spot[i] > 0.0)) throw ConfigError("black-scholes: S0 must be positive");
  }
}

std::vector<double> AssetPaths::asset(int i) const {
  std::vector<double> out(static_cast<std::size_t>(steps_) + 1);
  for (int k = 0; k <= steps_; ++k) out[static_cast<std::size_t>(k)] = (*this)(k, i);
  return out;
}

AssetPaths bs_path(const BrownianPath& path, const BlackScholesParams& params) {
  if (params.assets() != path.dimension()) {
    throw ConfigError("bs_path: " + std::to_string(params.assets()) + " assets for a " +
                      std::to_string(path.dimension()) + "-dimensional Brownian path");
  }
  AssetPaths out(path.steps(), params.assets());
  for (int i = 0; i < params.assets(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double mu = params.drift[k] - 0.5 * params.vol[k] * params.vol[k];
    for (int node = 0; node <= path.steps(); ++node) {
      out(node, i) = params.spot[k] * std::exp(mu * path.time(node) + params.vol[k] * path(node, i));
    }
  }
  return out;
}

double terminal_barrier_call(std::span<const double> asset_grid, double strike, double barrier) {
  for (double s : asset_grid) {
    if (s < barrier) return 0.0;
  }
  return std::max(asset_grid.back() - strike, 0.0);
}

double terminal_basket_put(const AssetPaths& paths, double strike) {
  double mean = 0.0;
  for (int i = 0; i < paths.assets(); ++i) mean += paths(paths.steps(), i);
  mean /= paths.assets();
  return std::max(strike - mean, 0.0);
}

BasketDriverSpec::BasketDriverSpec(const BlackScholesParams& params, const CorrelationSpec& corr)
    : dimension_(params.assets()) {
  params.validate();
  if (corr.dimension() != dimension_) throw ConfigError("basket driver: correlation dimension mismatch");
  const int d = dimension_;
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) sigma(i, j) = params.vol[static_cast<std::size_t>(i)] * corr.lower(i, j);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
  if (!lu.isInvertible()) throw ConfigError("basket driver: volatility matrix Sigma is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  Eigen::VectorXd excess(d);
  for (int i = 0; i < d; ++i) excess(i) = params.drift[static_cast<std::size_t>(i)] - params.rate;
  const Eigen::VectorXd theta = inv * excess;
  const Eigen::RowVectorXd colsum = inv.colwise().sum();

  sigma_.resize(static_cast<std::size_t>(d * d));
  sigma_inv_.resize(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      sigma_[static_cast<std::size_t>(i * d + j)] = sigma(i, j);
      sigma_inv_[static_cast<std::size_t>(i * d + j)] = inv(i, j);
    }
  }
  theta_.assign(theta.data(), theta.data() + d);
  column_sums_.assign(colsum.data(), colsum.data() + d);
}

double BasketDriverSpec::sum_sigma_inverse(std::span<const double> z) const {
  double s = 0.0;
  for (int k = 0; k < dimension_; ++k) s += column_sums_[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
  return s;
}

double driver_borrowing(double /*t*/, double y, std::span<const double> z, const BasketDriverSpec& spec, double r,
                        double R) {
  double theta_z = 0.0;
  for (int k = 0; k < spec.dimension(); ++k) theta_z += spec.theta()[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
  const double gap = y - spec.sum_sigma_inverse(z);
  return -r * y - theta_z + (R - r) * std::max(-gap, 0.0);
}

BlackScholesParams BasketPutParams::market() const {
  const auto n = static_cast<std::size_t>(assets);
  BlackScholesParams p;
  p.spot.assign(n, spot);
  p.drift.assign(n, drift);
  p.vol.assign(n, vol);
  p.rate = rate;
  p.borrow_rate = borrow_rate;
  return p;
}

ProblemInstance make_cos_sup(bool include_origin) {
  ProblemInstance inst;
  inst.name = "cos_sup";
  inst.problem.dimension = 1;
  inst.problem.driver = driver_cos;
  inst.problem.terminal = [include_origin](const BrownianPath& path) { return terminal_sup_bm(path, include_origin); };
  return inst;
}

ProblemInstance make_barrier_call(const BarrierCallParams& params) {
  BlackScholesParams market{{params.spot}, {params.rate}, {params.vol}, params.rate, params.rate};
  market.validate();
  ProblemInstance inst;
  inst.name = "barrier_call";
  inst.problem.dimension = 1;
  const double r = params.rate;
  inst.problem.driver = [r](double, double y, std::span<const double>) { return -r * y; };
  inst.problem.terminal = [market, params](const BrownianPath& path) {
    const AssetPaths s = bs_path(path, market);
    return terminal_barrier_call(s.asset(0), params.strike, params.barrier);
  };
  const double scale = params.vol * params.spot;
  inst.derived = [scale](double, std::span<const double> z0) {
    return std::vector<std::pair<std::string, double>>{{"delta0", z0[0] / scale}};
  };
  return inst;
}

ProblemInstance make_basket_put(const BasketPutParams& params) {
  if (params.borrow_rate < params.rate) throw ConfigError("basket_put: borrowing rate R must be >= r");
  const BlackScholesParams market = params.market();
  market.validate();
  const CorrelationSpec corr(params.rho, params.assets);
  const auto spec = std::make_shared<const BasketDriverSpec>(market, corr);
  ProblemInstance inst;
  inst.name = "basket_put";
  inst.problem.dimension = params.assets;
  const double r = params.rate;
  const double R = params.borrow_rate;
  inst.problem.driver = [spec, r, R](double t, double y, std::span<const double> z) {
    return driver_borrowing(t, y, z, *spec, r, R);
  };
  const double strike = params.strike;
  inst.problem.terminal = [market, strike](const BrownianPath& path) {
    return terminal_basket_put(bs_path(path, market), strike);
  };
  inst.correlation = corr;
  inst.derived = [spec, market](double, std::span<const double> z0) {
    std::vector<std::pair<std::string, double>> out;
    for (int i = 0; i < spec->dimension(); ++i) {
      double v = 0.0;
      for (int k = 0; k < spec->dimension(); ++k) v += spec->sigma_inverse(i, k) * z0[static_cast<std::size_t>(k)];
      out.emplace_back("delta0_" + std::to_string(i + 1), v / market.spot[static_cast<std::size_t>(i)]);
    }
    return out;
  };
  return inst;
}

ProblemInstance make_linear_test(double rate, double terminal_value) {
  ProblemInstance inst;
  inst.name = "linear_test";
  inst.problem.dimension = 1;
  inst.problem.driver = [rate](double, double y, std::span<const double>) { return -rate * y; };
  inst.problem.terminal = [terminal_value](const BrownianPath&) { return terminal_value; };
  return inst;
}

ProblemInstance make_martingale_test() {
  ProblemInstance inst;
  inst.name = "martingale_test";
  inst.problem.dimension = 1;
  inst.problem.driver = [](double, double, std::span<const double>) { return 0.0; };
  inst.problem.terminal = [](const BrownianPath& path) { return path(path.steps(), 0); };
  return inst;
}

ProblemInstance make_zero_test(int dimension) {
  ProblemInstance inst;
  inst.name = "zero_test";
  inst.problem.dimension = dimension;
  inst.problem.driver = [](double, double, std::span<const double>) { return 0.0; };
  inst.problem.terminal = [](const BrownianPath&) { return 0.0; };
  return inst;
}

void ProblemRegistry::add(std::string name, Factory factory) {
  factories_[std::move(name)] = std::move(factory);
}

ProblemInstance ProblemRegistry::make(const std::string& name, const ProblemParams& params) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown problem '" + name + "' (known: " + known + ")");
  }
  return it->second(params);
}

std::vector<std::string> ProblemRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, factory] : factories_) out.push_back(name);
  return out;
}

ProblemRegistry ProblemRegistry::builtin() {
  ProblemRegistry reg;
  reg.add("cos_sup", [](const ProblemParams& p) {
    ParamReader in("cos_sup", p);
    const double origin = in.get("include_origin", 0.0);
    in.finish();
    if (origin != 0.0 && origin != 1.0) throw ConfigError("problem cos_sup: include_origin must be 0 or 1");
    return make_cos_sup(origin == 1.0);
  });
  reg.add("barrier_call", [](const ProblemParams& p) {
    ParamReader in("barrier_call", p);
    BarrierCallParams b;
    b.spot = in.get("S0", b.spot);
    b.rate = in.get("r", b.rate);
    b.vol = in.get("sigma", b.vol);
    b.strike = in.get("K", b.strike);
    b.barrier = in.get("L", b.barrier);
    in.finish();
    return make_barrier_call(b);
  });
  reg.add("basket_put", [](const ProblemParams& p) {
    ParamReader in("basket_put", p);
    BasketPutParams b;
    b.assets = as_count("basket_put", "d", in.get("d", b.assets));
    b.spot = in.get("S0", b.spot);
    b.rate = in.get("r", b.rate);
    b.borrow_rate = in.get("R", b.borrow_rate);
    b.drift = in.get("mu", b.drift);
    b.vol = in.get("sigma", b.vol);
    b.strike = in.get("K", b.strike);
    b.rho = in.get("rho", b.rho);
    in.finish();
    return make_basket_put(b);
  });
  reg.add("linear_test", [](const ProblemParams& p) {
    ParamReader in("linear_test", p);
    const double r = in.get("r", 0.05);
    const double c = in.get("c", 1.0);
    in.finish();
    return make_linear_test(r, c);
  });
  reg.add("martingale_test", [](const ProblemParams& p) {
    ParamReader("martingale_test", p).finish();
    return make_martingale_test();
  });
  reg.add("zero_test", [](const ProblemParams& p) {
    ParamReader in("zero_test", p);
    const int d = as_count("zero_test", "d", in.get("d", 1));
    in.finish();
    return make_zero_test(d);
  });
  return reg;
}

}  // namespace chaosbsde
