#include "chaosbsde/chaos.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "chaosbsde/errors.hpp"
#include "chaosbsde/hermite.hpp"

namespace chaosbsde {

namespace {

constexpr std::size_t kReductionBlock = 1024;
constexpr std::size_t kMaxPartialDoubles = std::size_t{1} << 25;
constexpr int kMaxDimension = 255;

void check_values(std::span<const double> values, const SamplePanel& panel, const IndexUniverse& universe) {
  if (values.size() != panel.samples()) {
    throw DataError("estimate: " + std::to_string(values.size()) + " values for a panel of " +
                    std::to_string(panel.samples()) + " samples");
  }
  if (!panel.matches(universe.basis())) throw DataError("estimate: panel does not match the basis");
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (!std::isfinite(values[m])) {
      throw DataError("estimate: non-finite value at sample " + std::to_string(m));
    }
  }
}

void check_shapes(const ChaosCoefficients& c, const IndexUniverse& universe, const SamplePanel& panel,
                  std::size_t m) {
  if (!(c.basis == universe.basis()) || c.coeffs.size() != universe.size()) {
    throw DataError("chaos: coefficients do not match the index universe");
  }
  if (!panel.matches(c.basis)) throw DataError("chaos: panel does not match the coefficient basis");
  if (m >= panel.samples()) throw DomainError("chaos: sample " + std::to_string(m) + " out of range");
}

// Incremental grid projections up to node r_max. The value at node r is the
// value at r-1 plus the contribution of indices whose last step is r, so
// every caller sees the same summation order.
template <bool kWithDerivative>
void accumulate_grid(const ChaosCoefficients& c, const IndexUniverse& universe, const HermiteTable& table,
                     int r_max, std::span<double> y, std::span<double> z) {
  const ChaosBasis& basis = universe.basis();
  const int d = basis.dimension;
  const double inv_sqrt_h = 1.0 / std::sqrt(basis.step_size());
  y[0] = c.d0;
  if constexpr (kWithDerivative) {
    for (int l = 0; l < d; ++l) z[static_cast<std::size_t>(l)] = inv_sqrt_h * c.coeffs[universe.unit_rank(l)];
  }
  std::array<double, kMaxDimension> dz{};
  std::array<SlotPower, kMaxDimension> current{};
  for (int r = 1; r <= r_max; ++r) {
    double dy = 0.0;
    if constexpr (kWithDerivative) std::fill_n(dz.begin(), d, 0.0);
    for (const std::uint32_t rank : universe.ending_at(r)) {
      const double coeff = c.coeffs[rank];
      double past = 1.0;
      double now = 1.0;
      int n_current = 0;
      for (const SlotPower& t : universe.terms(rank)) {
        const double k = table(t.slot, t.power);
        if (t.step < r) {
          past *= k;
        } else {
          now *= k;
          current[static_cast<std::size_t>(n_current++)] = t;
        }
      }
      dy += coeff * (past * now);
      if constexpr (kWithDerivative) {
        for (int a = 0; a < n_current; ++a) {
          const SlotPower& ta = current[static_cast<std::size_t>(a)];
          double other = 1.0;
          for (int b = 0; b < n_current; ++b) {
            if (b != a) {
              const SlotPower& tb = current[static_cast<std::size_t>(b)];
              other *= table(tb.slot, tb.power);
            }
          }
          dz[ta.component] += coeff * (past * table(ta.slot, ta.power - 1) * other);
        }
      }
    }
    y[static_cast<std::size_t>(r)] = y[static_cast<std::size_t>(r - 1)] + dy;
    if constexpr (kWithDerivative) {
      for (int l = 0; l < d; ++l) {
        z[static_cast<std::size_t>(r * d + l)] = inv_sqrt_h * dz[static_cast<std::size_t>(l)];
      }
    }
  }
}

void pairwise_reduce(std::vector<std::vector<double>>& partials) {
  const std::size_t n = partials.size();
  for (std::size_t stride = 1; stride < n; stride *= 2) {
    for (std::size_t b = 0; b + stride < n; b += 2 * stride) {
      auto& dst = partials[b];
      const auto& src = partials[b + stride];
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

struct IntraPoint {
  int r;
  double ratio;                 // (t - t_{r-1}) / h
  std::vector<double> hermite;  // K_0..K_p of w_j / sqrt(t - t_{r-1}), component-major
};

IntraPoint make_intra_point(const ChaosBasis& basis, double t, std::span<const double> w) {
  if (static_cast<int>(w.size()) != basis.dimension) {
    throw DataError("intra: expected one partial increment per Brownian component");
  }
  IntraPoint pt;
  pt.r = interval_of(basis, t);
  const double h = basis.step_size();
  const double tau = t - (pt.r - 1) * h;
  pt.ratio = tau / h;
  const auto stride = static_cast<std::size_t>(basis.order + 1);
  pt.hermite.resize(stride * static_cast<std::size_t>(basis.dimension));
  for (int j = 0; j < basis.dimension; ++j) {
    if (!std::isfinite(w[static_cast<std::size_t>(j)])) throw DomainError("intra: non-finite increment");
    hermite_fill(w[static_cast<std::size_t>(j)] / std::sqrt(tau),
                 std::span<double>(pt.hermite).subspan(static_cast<std::size_t>(j) * stride, stride));
  }
  return pt;
}

// ((t - t_{r-1}) / h)^{n/2} K_n(w_j / sqrt(t - t_{r-1}))
double intra_factor(const IntraPoint& pt, int stride, int component, int power) {
  return std::pow(pt.ratio, 0.5 * power) *
         pt.hermite[static_cast<std::size_t>(component * stride + power)];
}

}  // namespace

HermiteTable::HermiteTable(const ChaosBasis& basis)
    : steps_(basis.steps),
      dimension_(basis.dimension),
      stride_(static_cast<std::size_t>(basis.order) + 1),
      values_(static_cast<std::size_t>(basis.slot_count()) * stride_, 0.0) {}

void HermiteTable::assign(std::span<const double> row) {
  for (int i = 0; i < steps_; ++i) {
    for (int j = 0; j < dimension_; ++j) {
      const std::size_t slot = static_cast<std::size_t>(j * steps_ + i);
      hermite_fill(row[static_cast<std::size_t>(i * dimension_ + j)],
                   std::span<double>(values_).subspan(slot * stride_, stride_));
    }
  }
}

ChaosCoefficients estimate_coefficients(std::span<const double> values, const SamplePanel& panel,
                                        const IndexUniverse& universe, EstimationOptions options) {
  check_values(values, panel, universe);
  const std::size_t M = panel.samples();
  const std::size_t U = universe.size();
  const std::size_t width = U + 1;  // slot 0 holds sum F for d0
  std::size_t block = kReductionBlock;
  if (((M + block - 1) / block) * width > kMaxPartialDoubles) {
    const std::size_t max_blocks = std::max<std::size_t>(1, kMaxPartialDoubles / width);
    block = (M + max_blocks - 1) / max_blocks;
  }
  const std::size_t n_blocks = (M + block - 1) / block;
  std::vector<std::vector<double>> partials(n_blocks);

#pragma omp parallel num_threads(resolve_threads(options.threads))
  {
    HermiteTable table(universe.basis());
#pragma omp for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
      std::vector<double> acc(width, 0.0);
      const std::size_t begin = static_cast<std::size_t>(b) * block;
      const std::size_t end = std::min(M, begin + block);
      for (std::size_t m = begin; m < end; ++m) {
        table.assign(panel.row(m));
        const double f = values[m];
        acc[0] += f;
        for (std::size_t rank = 0; rank < U; ++rank) {
          double prod = f;
          for (const SlotPower& t : universe.terms(rank)) prod *= table(t.slot, t.power);
          acc[rank + 1] += prod;
        }
      }
      partials[static_cast<std::size_t>(b)] = std::move(acc);
    }
  }
  pairwise_reduce(partials);

  const double inv_m = 1.0 / static_cast<double>(M);
  ChaosCoefficients out{universe.basis(), partials[0][0] * inv_m, std::vector<double>(U)};
  for (std::size_t rank = 0; rank < U; ++rank) {
    out.coeffs[rank] = universe.weight(rank) * (partials[0][rank + 1] * inv_m);
  }
  return out;
}

ChaosCoefficients estimate_coefficients_saa(std::span<const double> values, const SamplePanel& panel,
                                            const IndexUniverse& universe, double ridge) {
  check_values(values, panel, universe);
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw DomainError("saa: ridge must be a nonnegative number");
  const std::size_t M = panel.samples();
  const std::size_t U = universe.size();
  if (M <= U + 1) {
    throw DataError("saa: underdetermined least-squares problem, M=" + std::to_string(M) +
                    " must exceed the number of coefficients + 1 = " + std::to_string(U + 1));
  }
  const auto cols = static_cast<Eigen::Index>(U + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cols);
  HermiteTable table(universe.basis());
  for (std::size_t begin = 0; begin < M; begin += kReductionBlock) {
    const std::size_t end = std::min(M, begin + kReductionBlock);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(end - begin), cols);
    Eigen::VectorXd f(static_cast<Eigen::Index>(end - begin));
    for (std::size_t m = begin; m < end; ++m) {
      const auto row = static_cast<Eigen::Index>(m - begin);
      table.assign(panel.row(m));
      a(row, 0) = 1.0;
      for (std::size_t rank = 0; rank < U; ++rank) {
        double prod = 1.0;
        for (const SlotPower& t : universe.terms(rank)) prod *= table(t.slot, t.power);
        a(row, static_cast<Eigen::Index>(rank + 1)) = prod;
      }
      f(row) = values[m];
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    rhs.noalias() += a.transpose() * f;
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  gram /= static_cast<double>(M);
  rhs /= static_cast<double>(M);

  if (ridge == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition <= 1e12)) {
      std::ostringstream msg;
      msg << "saa: Gram matrix condition estimate " << condition
          << " exceeds 1e12; retry with a ridge around " << 1e-8 * gram.trace() / static_cast<double>(cols);
      throw IllConditionedError(msg.str());
    }
  } else {
    gram.diagonal().array() += ridge;
  }
  const Eigen::VectorXd solution = gram.ldlt().solve(rhs);
  if (!solution.allFinite()) throw NumericalError("saa: normal-equation solve produced non-finite values");

  ChaosCoefficients out{universe.basis(), solution(0), std::vector<double>(U)};
  for (std::size_t rank = 0; rank < U; ++rank) out.coeffs[rank] = solution(static_cast<Eigen::Index>(rank + 1));
  return out;
}

void grid_projections(const ChaosCoefficients& c, const IndexUniverse& universe, const HermiteTable& table,
                      std::span<double> y, std::span<double> z) {
  const ChaosBasis& basis = universe.basis();
  accumulate_grid<true>(c, universe, table, basis.steps, y, z);
}

double conditional_expectation_grid(const ChaosCoefficients& c, const IndexUniverse& universe,
                                    const SamplePanel& panel, std::size_t m, int r) {
  check_shapes(c, universe, panel, m);
  if (r < 0 || r > c.basis.steps) throw DomainError("conditional_expectation_grid: r out of range");
  HermiteTable table(c.basis);
  table.assign(panel, m);
  std::vector<double> y(static_cast<std::size_t>(r) + 1);
  accumulate_grid<false>(c, universe, table, r, y, {});
  return y.back();
}

double evaluate_chaos(const ChaosCoefficients& c, const IndexUniverse& universe, const SamplePanel& panel,
                      std::size_t m) {
  return conditional_expectation_grid(c, universe, panel, m, c.basis.steps);
}

double malliavin_derivative_grid(const ChaosCoefficients& c, const IndexUniverse& universe,
                                 const SamplePanel& panel, std::size_t m, int r, int component) {
  check_shapes(c, universe, panel, m);
  const int d = c.basis.dimension;
  if (r < 0 || r > c.basis.steps) throw DomainError("malliavin_derivative_grid: r out of range");
  if (component < 0 || component >= d) throw DomainError("malliavin_derivative_grid: component out of range");
  HermiteTable table(c.basis);
  table.assign(panel, m);
  std::vector<double> y(static_cast<std::size_t>(r) + 1);
  std::vector<double> z(static_cast<std::size_t>((r + 1) * d));
  accumulate_grid<true>(c, universe, table, r, y, z);
  return z[static_cast<std::size_t>(r * d + component)];
}

int interval_of(const ChaosBasis& basis, double t) {
  if (!std::isfinite(t) || t <= 0.0 || t > basis.horizon * (1.0 + 1e-12)) {
    throw DomainError("intra: time " + std::to_string(t) + " outside (0, T]");
  }
  const int r = static_cast<int>(std::ceil(t / basis.step_size() - 1e-9));
  return std::clamp(r, 1, basis.steps);
}

double conditional_expectation_intra(const ChaosCoefficients& c, const IndexUniverse& universe,
                                     const SamplePanel& panel, std::size_t m, double t,
                                     std::span<const double> partial_increment) {
  check_shapes(c, universe, panel, m);
  const IntraPoint pt = make_intra_point(c.basis, t, partial_increment);
  HermiteTable table(c.basis);
  table.assign(panel, m);
  // Nodes before t_{r-1} are ordinary grid projections.
  std::vector<double> y(static_cast<std::size_t>(pt.r));
  accumulate_grid<false>(c, universe, table, pt.r - 1, y, {});
  const int stride = c.basis.order + 1;
  double dy = 0.0;
  for (const std::uint32_t rank : universe.ending_at(pt.r)) {
    double prod = 1.0;
    for (const SlotPower& s : universe.terms(rank)) {
      prod *= s.step < pt.r ? table(s.slot, s.power) : intra_factor(pt, stride, s.component, s.power);
    }
    dy += c.coeffs[rank] * prod;
  }
  return y.back() + dy;
}

double malliavin_derivative_intra(const ChaosCoefficients& c, const IndexUniverse& universe,
                                  const SamplePanel& panel, std::size_t m, double t,
                                  std::span<const double> partial_increment, int component) {
  check_shapes(c, universe, panel, m);
  if (component < 0 || component >= c.basis.dimension) {
    throw DomainError("malliavin_derivative_intra: component out of range");
  }
  const IntraPoint pt = make_intra_point(c.basis, t, partial_increment);
  HermiteTable table(c.basis);
  table.assign(panel, m);
  const int stride = c.basis.order + 1;
  double dz = 0.0;
  for (const std::uint32_t rank : universe.ending_at(pt.r)) {
    bool charged = false;
    double prod = 1.0;
    for (const SlotPower& s : universe.terms(rank)) {
      if (s.step < pt.r) {
        prod *= table(s.slot, s.power);
      } else if (s.component == component) {
        charged = true;
        prod *= intra_factor(pt, stride, s.component, s.power - 1);
      } else {
        prod *= intra_factor(pt, stride, s.component, s.power);
      }
    }
    if (charged) dz += c.coeffs[rank] * prod;
  }
  return dz / std::sqrt(c.basis.step_size());
}

std::string slot_notation(const IndexUniverse& universe, std::size_t rank) {
  std::ostringstream out;
  bool first = true;
  for (const SlotPower& t : universe.terms(rank)) {
    if (!first) out << '*';
    first = false;
    out << 'G' << t.step;
    if (universe.basis().dimension > 1) out << '.' << static_cast<int>(t.component) + 1;
    if (t.power > 1) out << '^' << static_cast<int>(t.power);
  }
  return out.str();
}

void write_coefficients_text(const ChaosCoefficients& c, const IndexUniverse& universe, std::ostream& out) {
  if (c.coeffs.size() != universe.size()) throw DataError("write_coefficients_text: size mismatch");
  const auto old_precision = out.precision(17);
  out << "rank\tindex\tvalue\n";
  out << "d0\t1\t" << c.d0 << '\n';
  for (std::size_t rank = 0; rank < c.coeffs.size(); ++rank) {
    out << rank << '\t' << slot_notation(universe, rank) << '\t' << c.coeffs[rank] << '\n';
  }
  out.precision(old_precision);
}

void write_coefficients_binary(const ChaosCoefficients& c, std::ostream& out) {
  const std::uint64_t header[3] = {static_cast<std::uint64_t>(c.basis.steps),
                                   static_cast<std::uint64_t>(c.basis.dimension),
                                   static_cast<std::uint64_t>(c.basis.order)};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(&c.basis.horizon), sizeof(double));
  out.write(reinterpret_cast<const char*>(&c.d0), sizeof(double));
  const auto size = static_cast<std::uint64_t>(c.coeffs.size());
  out.write(reinterpret_cast<const char*>(&size), sizeof size);
  out.write(reinterpret_cast<const char*>(c.coeffs.data()),
            static_cast<std::streamsize>(c.coeffs.size() * sizeof(double)));
  if (!out) throw DataError("write_coefficients_binary: stream error");
}

ChaosCoefficients read_coefficients_binary(std::istream& in) {
  std::uint64_t header[3] = {};
  ChaosCoefficients c;
  std::uint64_t size = 0;
  in.read(reinterpret_cast<char*>(header), sizeof header);
  in.read(reinterpret_cast<char*>(&c.basis.horizon), sizeof(double));
  in.read(reinterpret_cast<char*>(&c.d0), sizeof(double));
  in.read(reinterpret_cast<char*>(&size), sizeof size);
  if (!in) throw DataError("read_coefficients_binary: truncated header");
  c.basis.steps = static_cast<int>(header[0]);
  c.basis.dimension = static_cast<int>(header[1]);
  c.basis.order = static_cast<int>(header[2]);
  c.basis.validate();
  if (size != IndexUniverse::count(c.basis)) throw DataError("read_coefficients_binary: size does not match basis");
  c.coeffs.resize(size);
  in.read(reinterpret_cast<char*>(c.coeffs.data()), static_cast<std::streamsize>(size * sizeof(double)));
  if (!in) throw DataError("read_coefficients_binary: truncated body");
  return c;
}

}  // namespace chaosbsde
