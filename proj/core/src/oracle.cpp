#include "chaosbsde/oracle.hpp"

#include <algorithm>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <vector>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

constexpr double kZ99 = 2.5758293035489004;
constexpr std::size_t kPairBlock = 4096;
constexpr std::uint64_t kBarrierTag = 0xba77'1e7c'a11d'0001ULL;
constexpr std::uint64_t kBasketTag = 0xba5c'e7b0'7d00'0002ULL;

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Runs `pair_payoff(engine)` once per antithetic pair, in fixed blocks with
// per-block engines, and reduces the block moments pairwise.
template <typename PairPayoff>
ReferenceValue antithetic_mc(std::size_t paths, std::uint64_t seed, int threads, double discount,
                             PairPayoff pair_payoff) {
  const std::size_t pairs = std::max<std::size_t>(1, paths / 2);
  const std::size_t n_blocks = (pairs + kPairBlock - 1) / kPairBlock;
  std::vector<Moments> blocks(n_blocks);
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
    boost::random::mt19937_64 engine(mix_seed(seed, static_cast<std::uint64_t>(b)));
    Moments acc;
    const std::size_t begin = static_cast<std::size_t>(b) * kPairBlock;
    const std::size_t end = std::min(pairs, begin + kPairBlock);
    for (std::size_t k = begin; k < end; ++k) {
      const double v = pair_payoff(engine);
      acc.sum += v;
      acc.sum_sq += v * v;
    }
    blocks[static_cast<std::size_t>(b)] = acc;
  }
  for (std::size_t stride = 1; stride < n_blocks; stride *= 2) {
    for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride) {
      blocks[b].sum += blocks[b + stride].sum;
      blocks[b].sum_sq += blocks[b + stride].sum_sq;
    }
  }
  const double n = static_cast<double>(pairs);
  const double mean = blocks[0].sum / n;
  const double var = pairs > 1 ? std::max(0.0, (blocks[0].sum_sq - n * mean * mean) / (n - 1)) : 0.0;
  ReferenceValue out;
  out.value = discount * mean;
  out.half_width = discount * kZ99 * std::sqrt(var / n);
  out.method = ReferenceMethod::PlainMonteCarlo;
  out.paths = 2 * pairs;
  return out;
}

}  // namespace

std::string to_string(ReferenceMethod method) {
  return method == ReferenceMethod::ClosedForm ? "closed-form" : "plain-mc";
}

ReferenceValue linear_bsde_closed_form(double rate, double horizon, double terminal_value) {
  return ReferenceValue{terminal_value * std::exp(-rate * horizon), 0.0, ReferenceMethod::ClosedForm, 0};
}

ReferenceValue barrier_call_mc(const BarrierCallParams& params, double horizon, int steps, std::size_t paths,
                               std::uint64_t seed, int threads) {
  if (paths < 10'000) throw ConfigError("barrier_call_mc: at least 1e4 reference paths are required");
  if (steps < 1 || !(horizon > 0.0)) throw ConfigError("barrier_call_mc: invalid grid");
  const double h = horizon / steps;
  const double drift = (params.rate - 0.5 * params.vol * params.vol) * h;
  const double diffusion = params.vol * std::sqrt(h);
  const double log_barrier = std::log(params.barrier / params.spot);
  auto payoff = [&](boost::random::mt19937_64& engine) {
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    double x_up = 0.0;
    double x_down = 0.0;
    bool alive_up = log_barrier <= 0.0;
    bool alive_down = alive_up;
    for (int i = 0; i < steps; ++i) {
      const double g = normal(engine);
      x_up += drift + diffusion * g;
      x_down += drift - diffusion * g;
      alive_up = alive_up && x_up >= log_barrier;
      alive_down = alive_down && x_down >= log_barrier;
    }
    const double up = alive_up ? std::max(params.spot * std::exp(x_up) - params.strike, 0.0) : 0.0;
    const double down = alive_down ? std::max(params.spot * std::exp(x_down) - params.strike, 0.0) : 0.0;
    return 0.5 * (up + down);
  };
  return antithetic_mc(paths, seed ^ kBarrierTag, threads, std::exp(-params.rate * horizon), payoff);
}

ReferenceValue basket_put_linear_mc(const BasketPutParams& params, double horizon, std::size_t paths,
                                    std::uint64_t seed, int threads) {
  const CorrelationSpec corr(params.rho, params.assets);
  const int d = params.assets;
  const double drift = (params.rate - 0.5 * params.vol * params.vol) * horizon;
  const double diffusion = params.vol * std::sqrt(horizon);
  auto payoff = [&](boost::random::mt19937_64& engine) {
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> g(static_cast<std::size_t>(d));
    for (auto& v : g) v = normal(engine);
    double mean_up = 0.0;
    double mean_down = 0.0;
    for (int i = 0; i < d; ++i) {
      double b = 0.0;
      for (int j = 0; j <= i; ++j) b += corr.lower(i, j) * g[static_cast<std::size_t>(j)];
      mean_up += params.spot * std::exp(drift + diffusion * b);
      mean_down += params.spot * std::exp(drift - diffusion * b);
    }
    mean_up /= d;
    mean_down /= d;
    return 0.5 * (std::max(params.strike - mean_up, 0.0) + std::max(params.strike - mean_down, 0.0));
  };
  return antithetic_mc(paths, seed ^ kBasketTag, threads, std::exp(-params.rate * horizon), payoff);
}

}  // namespace chaosbsde
