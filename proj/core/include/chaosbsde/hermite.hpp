#pragma once

#include <span>
#include <vector>

namespace chaosbsde {

// Hermite polynomials normalized by the generating function
//   exp(x t - t^2 / 2) = sum_n K_n(x) t^n,
// i.e. K_n = He_n / n! (probabilists' He_n), so that K_n' = K_{n-1}
// and E[K_n(G) K_m(G)] = delta_nm / n! for G standard normal.
// Evaluated by the recurrence (k + 1) K_{k+1} = x K_k - K_{k-1}.

struct HermiteValues {
  std::vector<double> values;  // values[k] = K_k(x), k = 0..n_max
};

/// K_n(x). Negative n yields 0 (the K_{-1} = 0 convention).
/// Throws DomainError for non-finite x.
double hermite(int n, double x);

HermiteValues hermite_all(int n_max, double x);

/// Fills out[k] = K_k(x) for k < out.size(). No allocation, no validation of x;
/// this is the kernel used in the per-sample hot loops.
void hermite_fill(double x, std::span<double> out) noexcept;

}  // namespace chaosbsde
