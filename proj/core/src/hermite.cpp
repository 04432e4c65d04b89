#include "chaosbsde/hermite.hpp"

#include <cmath>
#include <string>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("hermite: argument must be finite, got " + std::to_string(x));
  }
}

}  // namespace

void hermite_fill(double x, std::span<double> out) noexcept {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = x;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    out[k + 1] = (x * out[k] - out[k - 1]) / static_cast<double>(k + 1);
  }
}

double hermite(int n, double x) {
  require_finite(x);
  if (n < 0) return 0.0;
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = (x * cur - prev) / static_cast<double>(k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteValues hermite_all(int n_max, double x) {
  require_finite(x);
  if (n_max < 0) throw DomainError("hermite_all: n_max must be nonnegative");
  HermiteValues out;
  out.values.resize(static_cast<std::size_t>(n_max) + 1);
  hermite_fill(x, out.values);
  return out;
}

}  // namespace chaosbsde
