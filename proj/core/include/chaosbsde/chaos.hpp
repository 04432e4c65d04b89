#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chaosbsde/basis.hpp"
#include "chaosbsde/brownian.hpp"
#include "chaosbsde/multiindex.hpp"

namespace chaosbsde {

/// Truncated chaos decomposition d0 + sum_n c_n prod K_{n_i^j}(G_i^j),
/// coefficients aligned with IndexUniverse rank order.
struct ChaosCoefficients {
  ChaosBasis basis;
  double d0 = 0.0;
  std::vector<double> coeffs;
};

/// K_0..K_p at every slot of one sample, indexed by (slot, power).
class HermiteTable {
 public:
  explicit HermiteTable(const ChaosBasis& basis);

  /// Recomputes the table from one panel row (step-major N*d increments).
  void assign(std::span<const double> row);
  void assign(const SamplePanel& panel, std::size_t m) { assign(panel.row(m)); }

  double operator()(std::size_t slot, int power) const {
    return values_[slot * stride_ + static_cast<std::size_t>(power)];
  }

 private:
  int steps_;
  int dimension_;
  std::size_t stride_;
  std::vector<double> values_;
};

struct EstimationOptions {
  int threads = 0;
};

/// Empirical-mean estimator: d0 = mean(F), c_n = (n!/M) sum_m F^m prod K(G^m).
/// Deterministic block reduction: identical results for any thread count.
ChaosCoefficients estimate_coefficients(std::span<const double> values, const SamplePanel& panel,
                                        const IndexUniverse& universe, EstimationOptions options = {});

/// Sample-average approximation: least-squares fit of the chaos expansion
/// through normal equations (1/M) A^T A c = (1/M) A^T F, with `ridge` added
/// to the diagonal. Requires M > size + 1. Throws IllConditionedError when
/// the Gram condition estimate exceeds 1e12 and ridge == 0.
ChaosCoefficients estimate_coefficients_saa(std::span<const double> values, const SamplePanel& panel,
                                            const IndexUniverse& universe, double ridge = 0.0);

/// Full expansion at sample m. Same summation order as the grid projection at
/// r = N, so the two agree bitwise.
double evaluate_chaos(const ChaosCoefficients& c, const IndexUniverse& universe,
                      const SamplePanel& panel, std::size_t m);

/// E_{t_r}(C F) at sample m, r in 0..N.
double conditional_expectation_grid(const ChaosCoefficients& c, const IndexUniverse& universe,
                                    const SamplePanel& panel, std::size_t m, int r);

/// D^l_{t_r} E_{t_r}(C F) at sample m, r in 0..N, component l in 0..d-1.
/// At r = 0 this is h^{-1/2} c_{e_1^l}.
double malliavin_derivative_grid(const ChaosCoefficients& c, const IndexUniverse& universe,
                                 const SamplePanel& panel, std::size_t m, int r, int component);

/// Grid projections of one sample at every node: y[r] = E_{t_r}, z[r*d + l] = D^l_{t_r} E_{t_r}.
/// `table` must hold the sample's Hermite values. y has N+1 entries, z (N+1)*d.
void grid_projections(const ChaosCoefficients& c, const IndexUniverse& universe,
                      const HermiteTable& table, std::span<double> y, std::span<double> z);

/// E_t(C F) for t in (t_{r-1}, t_r]: the grid increments G_i, i < r, come from
/// the panel; `partial_increment[j]` is B^j_t - B^j_{t_{r-1}}.
double conditional_expectation_intra(const ChaosCoefficients& c, const IndexUniverse& universe,
                                     const SamplePanel& panel, std::size_t m, double t,
                                     std::span<const double> partial_increment);

/// D^l_t E_t(C F) for t in (t_{r-1}, t_r], same conventions.
double malliavin_derivative_intra(const ChaosCoefficients& c, const IndexUniverse& universe,
                                  const SamplePanel& panel, std::size_t m, double t,
                                  std::span<const double> partial_increment, int component);

/// Grid interval r with t in (t_{r-1}, t_r]; points within 1e-9 h of a node
/// snap to it. Throws DomainError unless 0 < t <= T.
int interval_of(const ChaosBasis& basis, double t);

// Inspection and snapshot formats.
//   text:   header line, then "d0<TAB>1<TAB>value", then one
//           "rank<TAB>multi-index<TAB>value" line per coefficient; multi-index
//           in slot notation, e.g. "G1^2*G3" for d = 1 or "G1.2^2" (step 1,
//           component 2) for d > 1.
//   binary: u64 N, u64 d, u64 p, f64 T, f64 d0, u64 size, size * f64.
std::string slot_notation(const IndexUniverse& universe, std::size_t rank);
void write_coefficients_text(const ChaosCoefficients& c, const IndexUniverse& universe, std::ostream& out);
void write_coefficients_binary(const ChaosCoefficients& c, std::ostream& out);
ChaosCoefficients read_coefficients_binary(std::istream& in);

}  // namespace chaosbsde
