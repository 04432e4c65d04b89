#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chaosbsde/basis.hpp"

namespace chaosbsde {

/// Dense d x N array of Hermite degrees n_i^j addressing one chaos coefficient.
class MultiIndex {
 public:
  MultiIndex(int dimension, int steps);
  /// `degrees` in component-major slot order (size d * N).
  MultiIndex(int dimension, int steps, std::vector<int> degrees);

  int dimension() const { return dimension_; }
  int steps() const { return steps_; }
  /// |n|, the total degree.
  int degree() const { return degree_; }

  /// Degree at (component in 0..d-1, step in 1..N).
  int operator()(int component, int step) const;
  void set(int component, int step, int value);

  std::span<const int> flat() const { return degrees_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  int dimension_;
  int steps_;
  std::vector<int> degrees_;
  int degree_ = 0;
};

/// n! = prod_{j,i} (n_i^j)!
std::uint64_t factorial_weight(const MultiIndex& n);

/// One nonzero entry of a multi-index in the compact universe storage.
struct SlotPower {
  std::uint32_t slot;       // component * N + step - 1
  std::uint16_t step;       // 1..N
  std::uint8_t component;   // 0..d-1
  std::uint8_t power;       // n_i^j > 0
};

/// All multi-indices with 1 <= |n| <= p over the d*N slots of a basis,
/// in canonical order: ascending degree, then descending lexicographic
/// order of the component-major slot vector. For d = 1, N = 2, p = 2:
/// (1,0) (0,1) (2,0) (1,1) (0,2).
///
/// Each index is stored sparsely as its nonzero (slot, power) entries in
/// ascending slot order. Indices are also grouped by their last nonzero
/// time step, which is what the grid conditional expectation and Malliavin
/// derivative formulas iterate over.
class IndexUniverse {
 public:
  static constexpr std::size_t kDefaultSizeCap = 50'000'000;

  /// Throws ConfigError for an invalid basis, ResourceError when the
  /// universe would exceed `size_cap` entries.
  explicit IndexUniverse(const ChaosBasis& basis, std::size_t size_cap = kDefaultSizeCap);

  /// Sum_{k=1}^{p} C(dN + k - 1, k); saturates at UINT64_MAX.
  static std::uint64_t count(const ChaosBasis& basis);

  const ChaosBasis& basis() const { return basis_; }
  std::size_t size() const { return degree_.size(); }

  std::span<const SlotPower> terms(std::size_t rank) const {
    return {terms_.data() + offsets_[rank], terms_.data() + offsets_[rank + 1]};
  }
  int degree(std::size_t rank) const { return degree_[rank]; }
  /// n! as a double (exact for all realistic orders).
  double weight(std::size_t rank) const { return weight_[rank]; }
  /// Largest time step carrying a nonzero entry.
  int last_step(std::size_t rank) const { return last_step_[rank]; }

  /// Ranks whose last nonzero time step is `step` (1..N), in canonical order.
  std::span<const std::uint32_t> ending_at(int step) const { return ending_at_[step - 1]; }

  MultiIndex unrank(std::size_t rank) const;
  /// Throws DomainError if `n` does not belong to the universe.
  std::size_t rank(const MultiIndex& n) const;
  /// Rank of e_1^component: degree one at (component, step 1).
  std::size_t unit_rank(int component) const;

 private:
  std::uint64_t rank_within_degree(std::span<const int> flat, int degree) const;

  ChaosBasis basis_;
  std::vector<SlotPower> terms_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint8_t> degree_;
  std::vector<double> weight_;
  std::vector<std::uint16_t> last_step_;
  std::vector<std::vector<std::uint32_t>> ending_at_;
  std::vector<std::uint64_t> degree_offset_;  // first rank of each degree, index k-1
};

}  // namespace chaosbsde
