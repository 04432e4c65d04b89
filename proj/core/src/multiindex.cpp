#include "chaosbsde/multiindex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // c * (n - i) is divisible by i + 1; cancel the common factor first.
    const std::uint64_t g = std::gcd(c, i + 1);
    const std::uint64_t factor = (n - i) / ((i + 1) / g);
    if (c / g > kSaturated / factor) return kSaturated;
    c = (c / g) * factor;
  }
  return c;
}

// Number of ways to spread `total` units over `slots` slots.
std::uint64_t compositions(std::uint64_t total, std::uint64_t slots) {
  if (slots == 0) return total == 0 ? 1 : 0;
  return binomial(total + slots - 1, slots - 1);
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

MultiIndex::MultiIndex(int dimension, int steps)
    : dimension_(dimension),
      steps_(steps),
      degrees_(static_cast<std::size_t>(dimension) * static_cast<std::size_t>(steps), 0) {
  if (dimension < 1 || steps < 1) throw DomainError("MultiIndex: dimension and steps must be >= 1");
}

MultiIndex::MultiIndex(int dimension, int steps, std::vector<int> degrees)
    : dimension_(dimension), steps_(steps), degrees_(std::move(degrees)) {
  if (dimension < 1 || steps < 1) throw DomainError("MultiIndex: dimension and steps must be >= 1");
  if (degrees_.size() != static_cast<std::size_t>(dimension) * static_cast<std::size_t>(steps)) {
    throw DomainError("MultiIndex: expected d*N degrees");
  }
  for (int v : degrees_) {
    if (v < 0) throw DomainError("MultiIndex: degrees must be nonnegative");
    degree_ += v;
  }
}

int MultiIndex::operator()(int component, int step) const {
  return degrees_[static_cast<std::size_t>(component * steps_ + step - 1)];
}

void MultiIndex::set(int component, int step, int value) {
  if (component < 0 || component >= dimension_ || step < 1 || step > steps_) {
    throw DomainError("MultiIndex::set: position out of range");
  }
  if (value < 0) throw DomainError("MultiIndex::set: degrees must be nonnegative");
  auto& slot = degrees_[static_cast<std::size_t>(component * steps_ + step - 1)];
  degree_ += value - slot;
  slot = value;
}

std::uint64_t factorial_weight(const MultiIndex& n) {
  std::uint64_t w = 1;
  for (int v : n.flat()) {
    for (int k = 2; k <= v; ++k) w *= static_cast<std::uint64_t>(k);
  }
  return w;
}

std::uint64_t IndexUniverse::count(const ChaosBasis& basis) {
  const auto slots = static_cast<std::uint64_t>(basis.slot_count());
  std::uint64_t total = 0;
  for (int k = 1; k <= basis.order; ++k) {
    total = saturating_add(total, binomial(slots + static_cast<std::uint64_t>(k) - 1,
                                           static_cast<std::uint64_t>(k)));
  }
  return total;
}

IndexUniverse::IndexUniverse(const ChaosBasis& basis, std::size_t size_cap) : basis_(basis) {
  basis_.validate();
  const std::uint64_t expected = count(basis_);
  if (expected > size_cap || expected > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceError("IndexUniverse: " + std::to_string(expected) +
                        " multi-indices exceed the cap of " + std::to_string(size_cap));
  }
  if (basis_.order > 255) throw ResourceError("IndexUniverse: chaos order above 255");

  const int slots = basis_.slot_count();
  const int n_steps = basis_.steps;
  degree_.reserve(expected);
  weight_.reserve(expected);
  last_step_.reserve(expected);
  offsets_.reserve(expected + 1);
  offsets_.push_back(0);
  ending_at_.assign(static_cast<std::size_t>(n_steps), {});

  std::vector<SlotPower> current;
  current.reserve(static_cast<std::size_t>(basis_.order));

  auto emit = [&](int degree) {
    double w = 1.0;
    int last = 0;
    for (const auto& t : current) {
      w *= factorial(t.power);
      last = std::max<int>(last, t.step);
    }
    const auto rank = static_cast<std::uint32_t>(degree_.size());
    terms_.insert(terms_.end(), current.begin(), current.end());
    offsets_.push_back(terms_.size());
    degree_.push_back(static_cast<std::uint8_t>(degree));
    weight_.push_back(w);
    last_step_.push_back(static_cast<std::uint16_t>(last));
    ending_at_[static_cast<std::size_t>(last - 1)].push_back(rank);
  };

  // Descending lexicographic order on the dense slot vector: the earliest
  // nonzero slot first, and within it the largest power first.
  auto generate = [&](auto&& self, int first_slot, int remaining, int degree) -> void {
    if (remaining == 0) {
      emit(degree);
      return;
    }
    for (int s = first_slot; s < slots; ++s) {
      for (int v = remaining; v >= 1; --v) {
        current.push_back(SlotPower{static_cast<std::uint32_t>(s),
                                    static_cast<std::uint16_t>(s % n_steps + 1),
                                    static_cast<std::uint8_t>(s / n_steps),
                                    static_cast<std::uint8_t>(v)});
        self(self, s + 1, remaining - v, degree);
        current.pop_back();
      }
    }
  };

  for (int k = 1; k <= basis_.order; ++k) {
    degree_offset_.push_back(degree_.size());
    generate(generate, 0, k, k);
  }
}

MultiIndex IndexUniverse::unrank(std::size_t rank) const {
  if (rank >= size()) throw DomainError("IndexUniverse::unrank: rank out of range");
  MultiIndex n(basis_.dimension, basis_.steps);
  for (const auto& t : terms(rank)) n.set(t.component, t.step, t.power);
  return n;
}

std::uint64_t IndexUniverse::rank_within_degree(std::span<const int> flat, int degree) const {
  // Count same-degree vectors that are lexicographically greater.
  const auto slots = static_cast<std::uint64_t>(flat.size());
  std::uint64_t before = 0;
  int remaining = degree;
  for (std::uint64_t s = 0; s < slots && remaining > 0; ++s) {
    const int a = flat[s];
    for (int v = a + 1; v <= remaining; ++v) {
      before += compositions(static_cast<std::uint64_t>(remaining - v), slots - s - 1);
    }
    remaining -= a;
  }
  return before;
}

std::size_t IndexUniverse::rank(const MultiIndex& n) const {
  if (n.dimension() != basis_.dimension || n.steps() != basis_.steps) {
    throw DomainError("IndexUniverse::rank: multi-index shape does not match the basis");
  }
  const int k = n.degree();
  if (k < 1 || k > basis_.order) {
    throw DomainError("IndexUniverse::rank: degree " + std::to_string(k) + " outside [1, p]");
  }
  return static_cast<std::size_t>(degree_offset_[static_cast<std::size_t>(k - 1)] +
                                  rank_within_degree(n.flat(), k));
}

std::size_t IndexUniverse::unit_rank(int component) const {
  if (component < 0 || component >= basis_.dimension) {
    throw DomainError("IndexUniverse::unit_rank: component out of range");
  }
  // Degree-one indices come first, one per slot, in slot order.
  return static_cast<std::size_t>(basis_.slot(component, 1));
}

}  // namespace chaosbsde
