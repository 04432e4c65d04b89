#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "chaosbsde/problems.hpp"

namespace chaosbsde {

// Independent reference prices: closed forms where they exist, plain
// risk-neutral Monte Carlo with antithetic pairs otherwise. Monte Carlo
// seeds are XOR-ed with a per-oracle tag so they never coincide with a
// solver stream built from the same user seed.

enum class ReferenceMethod { ClosedForm, PlainMonteCarlo };

struct ReferenceValue {
  double value = 0.0;
  double half_width = 0.0;  // 99% confidence half-width; 0 for closed forms
  ReferenceMethod method = ReferenceMethod::ClosedForm;
  std::size_t paths = 0;
};

std::string to_string(ReferenceMethod method);

/// c exp(-r T)
ReferenceValue linear_bsde_closed_form(double rate, double horizon, double terminal_value);

/// Discounted discrete down-and-out call, monitored at the N+1 grid nodes.
/// Requires paths >= 1e4 (ConfigError otherwise).
ReferenceValue barrier_call_mc(const BarrierCallParams& params, double horizon, int steps, std::size_t paths,
                               std::uint64_t seed, int threads = 0);

/// Discounted basket put under the risk-neutral drift r.
ReferenceValue basket_put_linear_mc(const BasketPutParams& params, double horizon, std::size_t paths,
                                    std::uint64_t seed, int threads = 0);

}  // namespace chaosbsde
