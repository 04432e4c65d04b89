#include <cmath>
#include <sstream>
#include <vector>

#include "chaosbsde/basis.hpp"
#include "chaosbsde/brownian.hpp"
#include "chaosbsde/errors.hpp"
#include "doctest.h"

using namespace chaosbsde;

TEST_CASE("brownian: panel shape and determinism") {
  const ChaosBasis b{1.0, 20, 2, 1};
  const SamplePanel a = sample_panel(5000, b, 7);
  const SamplePanel c = sample_panel(5000, b, 7);
  const SamplePanel other = sample_panel(5000, b, 8);
  CHECK(a.samples() == 5000);
  CHECK(a.values().size() == 5000u * 20u * 2u);
  CHECK(a.matches(b));
  CHECK(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  CHECK(!std::equal(a.values().begin(), a.values().end(), other.values().begin()));
}

TEST_CASE("brownian: panel independent of thread count") {
  const ChaosBasis b{1.0, 10, 1, 1};
  const SamplePanel one = sample_panel(9000, b, 99, 1);
  const SamplePanel four = sample_panel(9000, b, 99, 4);
  CHECK(std::equal(one.values().begin(), one.values().end(), four.values().begin()));
}

TEST_CASE("brownian: prefix of a larger panel is the smaller panel") {
  const ChaosBasis b{1.0, 10, 1, 1};
  const SamplePanel small = sample_panel(3000, b, 5);
  const SamplePanel large = sample_panel(7000, b, 5);
  CHECK(std::equal(small.values().begin(), small.values().end(), large.values().begin()));
}

TEST_CASE("brownian: moments within statistical bands") {
  const ChaosBasis b{1.0, 20, 1, 1};
  const SamplePanel panel = sample_panel(100'000, b, 12345);
  const PanelMoments mom = panel_moments(panel);
  CHECK(mom.within_bands);
  CHECK(mom.worst_mean_deviation <= 5.0 / std::sqrt(1e5));
  CHECK(mom.worst_variance_deviation <= 5.0 * std::sqrt(2.0 / 1e5));

  // Gaussian tail mass beyond 3: 2 (1 - Phi(3)) = 0.0026998.
  std::size_t tail = 0;
  for (double g : panel.values()) tail += std::abs(g) > 3.0;
  const double n = static_cast<double>(panel.values().size());
  const double p = 0.0026997960632601866;
  CHECK(std::abs(tail / n - p) <= 5.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("brownian: path construction") {
  std::vector<double> g{1.0, -2.0, 0.5, 0.25};
  const SamplePanel panel(1, 4, 1, 1.0, 0, g);
  const BrownianPath path = brownian_path(panel, 0);
  CHECK(path(0, 0) == 0.0);
  CHECK(path(1, 0) == doctest::Approx(0.5));
  CHECK(path(2, 0) == doctest::Approx(-0.5));
  CHECK(path(4, 0) == doctest::Approx(0.5 * -0.25));
  CHECK(path.time(2) == doctest::Approx(0.5));

  const SamplePanel zero(1, 4, 1, 1.0, 0, std::vector<double>(4, 0.0));
  const BrownianPath flat = brownian_path(zero, 0);
  for (int j = 0; j <= 4; ++j) CHECK(flat(j, 0) == 0.0);
}

TEST_CASE("brownian: terminal variance equals T") {
  const ChaosBasis b{2.0, 8, 1, 1};
  const SamplePanel panel = sample_panel(200'000, b, 3);
  double s = 0.0, s2 = 0.0;
  BrownianPath path;
  for (std::size_t m = 0; m < panel.samples(); ++m) {
    brownian_path(panel, m, path);
    s += path(8, 0);
    s2 += path(8, 0) * path(8, 0);
  }
  const double n = static_cast<double>(panel.samples());
  const double var = s2 / n - (s / n) * (s / n);
  CHECK(std::abs(var - 2.0) <= 5.0 * 2.0 * std::sqrt(2.0 / n));
}

TEST_CASE("brownian: correlation") {
  const CorrelationSpec corr(0.1, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double c = 0.0;
      for (int k = 0; k < 5; ++k) c += corr.lower(i, k) * corr.lower(j, k);
      CHECK(c == doctest::Approx(corr.correlation(i, j)).epsilon(1e-14));
      if (j > i) CHECK(corr.lower(i, j) == 0.0);
    }
  }
  const ChaosBasis b{1.0, 4, 5, 1};
  const SamplePanel panel = sample_panel(100'000, b, 11);
  const SamplePanel cp = correlate(panel, corr);
  double s01 = 0.0;
  for (std::size_t m = 0; m < cp.samples(); ++m) s01 += cp.g(m, 2, 0) * cp.g(m, 2, 1);
  CHECK(std::abs(s01 / 1e5 - 0.1) <= 5.0 * std::sqrt(1.01 / 1e5));

  const SamplePanel same = correlate(panel, CorrelationSpec(0.0, 5));
  CHECK(std::equal(same.values().begin(), same.values().end(), panel.values().begin()));

  CHECK_THROWS_AS(CorrelationSpec(1.0, 3), ConfigError);
  CHECK_THROWS_AS(CorrelationSpec(-0.5, 3), ConfigError);
  CHECK_NOTHROW(CorrelationSpec(-0.49, 3));
}

TEST_CASE("brownian: panel round-trips through the binary format") {
  const SamplePanel panel = sample_panel(100, ChaosBasis{1.5, 6, 2, 1}, 42);
  std::stringstream buf;
  write_panel(panel, buf);
  const SamplePanel back = read_panel(buf);
  CHECK(back.samples() == 100);
  CHECK(back.steps() == 6);
  CHECK(back.dimension() == 2);
  CHECK(back.horizon() == 1.5);
  CHECK(back.seed() == 42);
  CHECK(std::equal(back.values().begin(), back.values().end(), panel.values().begin()));

  std::stringstream truncated(buf.str().substr(0, 30));
  CHECK_THROWS_AS(read_panel(truncated), DataError);
}

TEST_CASE("brownian: resource limits") {
  PanelLimits tiny;
  tiny.max_bytes = 1024;
  CHECK_THROWS_AS(sample_panel(1000, ChaosBasis{1.0, 10, 1, 1}, 1, 0, tiny), ResourceError);
  CHECK_THROWS_AS(sample_panel(0, ChaosBasis{1.0, 10, 1, 1}, 1), ConfigError);
}
