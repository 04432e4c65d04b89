#pragma once

namespace chaosbsde {

/// Step-function chaos basis on a regular grid t_i = i * T / N.
/// Slot (component j, step i) carries the standardized increment
/// G_i^j = (B^j_{t_i} - B^j_{t_{i-1}}) / sqrt(h); steps are 1-based.
struct ChaosBasis {
  double horizon = 1.0;  // T
  int steps = 1;         // N
  int dimension = 1;     // d
  int order = 1;         // p

  double step_size() const { return horizon / steps; }
  int slot_count() const { return dimension * steps; }
  /// Component-major flattening: slot = component * N + (step - 1).
  int slot(int component, int step) const { return component * steps + (step - 1); }

  /// Throws ConfigError unless T > 0, p >= 1, d >= 1 and N >= d * p.
  void validate() const;

  friend bool operator==(const ChaosBasis&, const ChaosBasis&) = default;
};

}  // namespace chaosbsde
