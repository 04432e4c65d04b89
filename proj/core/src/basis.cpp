#include "chaosbsde/basis.hpp"

#include <cmath>
#include <string>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

void ChaosBasis::validate() const {
  if (!(std::isfinite(horizon) && horizon > 0.0)) {
    throw ConfigError("basis: horizon T must be positive and finite");
  }
  if (order < 1) throw ConfigError("basis: chaos order p must be >= 1");
  if (dimension < 1 || dimension > 255) {
    throw ConfigError("basis: Brownian dimension d must be in [1, 255]");
  }
  if (steps < 1 || steps > 65535) throw ConfigError("basis: grid size N must be in [1, 65535]");
  if (steps < dimension * order) {
    throw ConfigError("basis: grid size N=" + std::to_string(steps) + " must be >= d*p=" +
                      std::to_string(dimension * order));
  }
}

}  // namespace chaosbsde
