#include "chaosbsde/brownian.hpp"

#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "chaosbsde/errors.hpp"

namespace chaosbsde {

namespace {

constexpr std::size_t kPanelBlock = 1024;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("read_panel: truncated header");
  return v;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int resolve_threads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

SamplePanel::SamplePanel(std::size_t samples, int steps, int dimension, double horizon,
                         std::uint64_t seed, std::vector<double> values)
    : samples_(samples),
      steps_(steps),
      dimension_(dimension),
      horizon_(horizon),
      seed_(seed),
      values_(std::move(values)) {
  if (samples_ == 0 || steps_ < 1 || dimension_ < 1 || !(horizon_ > 0.0)) {
    throw DataError("SamplePanel: invalid shape");
  }
  if (values_.size() != samples_ * static_cast<std::size_t>(steps_) * static_cast<std::size_t>(dimension_)) {
    throw DataError("SamplePanel: value count does not match M*N*d");
  }
}

bool SamplePanel::matches(const ChaosBasis& basis) const {
  return basis.steps == steps_ && basis.dimension == dimension_ && basis.horizon == horizon_;
}

SamplePanel sample_panel(std::size_t samples, const ChaosBasis& basis, std::uint64_t seed,
                         int threads, PanelLimits limits) {
  if (samples == 0) throw ConfigError("sample_panel: M must be >= 1");
  if (basis.steps < 1 || basis.dimension < 1 || !(basis.horizon > 0.0)) {
    throw ConfigError("sample_panel: invalid basis");
  }
  const auto width = static_cast<std::size_t>(basis.steps) * static_cast<std::size_t>(basis.dimension);
  if (samples > limits.max_bytes / sizeof(double) / width) {
    throw ResourceError("sample_panel: " + std::to_string(samples) + " x " + std::to_string(width) +
                        " doubles exceed the memory cap of " + std::to_string(limits.max_bytes) +
                        " bytes");
  }
  std::vector<double> values(samples * width);
  const auto blocks = static_cast<std::int64_t>((samples + kPanelBlock - 1) / kPanelBlock);

#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    boost::random::mt19937_64 engine(mix_seed(seed, static_cast<std::uint64_t>(b)));
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t begin = static_cast<std::size_t>(b) * kPanelBlock * width;
    const std::size_t end = std::min(samples, (static_cast<std::size_t>(b) + 1) * kPanelBlock) * width;
    for (std::size_t k = begin; k < end; ++k) values[k] = normal(engine);
  }
  return SamplePanel(samples, basis.steps, basis.dimension, basis.horizon, seed, std::move(values));
}

PanelMoments panel_moments(const SamplePanel& panel) {
  const std::size_t width = panel.row(0).size();
  std::vector<double> sum(width, 0.0);
  std::vector<double> sum_sq(width, 0.0);
  for (std::size_t m = 0; m < panel.samples(); ++m) {
    const auto row = panel.row(m);
    for (std::size_t k = 0; k < width; ++k) {
      sum[k] += row[k];
      sum_sq[k] += row[k] * row[k];
    }
  }
  const double M = static_cast<double>(panel.samples());
  PanelMoments out;
  for (std::size_t k = 0; k < width; ++k) {
    const double mean = sum[k] / M;
    const double var = M > 1 ? (sum_sq[k] - M * mean * mean) / (M - 1) : 0.0;
    out.worst_mean_deviation = std::max(out.worst_mean_deviation, std::abs(mean));
    out.worst_variance_deviation = std::max(out.worst_variance_deviation, std::abs(var - 1.0));
  }
  out.within_bands = out.worst_mean_deviation <= 5.0 / std::sqrt(M) &&
                     out.worst_variance_deviation <= 5.0 * std::sqrt(2.0 / M);
  return out;
}

BrownianPath::BrownianPath(int steps, int dimension, double step_size)
    : steps_(steps),
      dimension_(dimension),
      step_size_(step_size),
      values_(static_cast<std::size_t>(steps + 1) * static_cast<std::size_t>(dimension), 0.0) {}

void brownian_path(const SamplePanel& panel, std::size_t m, BrownianPath& out) {
  if (m >= panel.samples()) {
    throw DomainError("brownian_path: sample " + std::to_string(m) + " out of range");
  }
  if (out.steps() != panel.steps() || out.dimension() != panel.dimension() ||
      out.step_size() != panel.step_size()) {
    out = BrownianPath(panel.steps(), panel.dimension(), panel.step_size());
  }
  const double sqrt_h = std::sqrt(panel.step_size());
  for (int j = 0; j < panel.dimension(); ++j) {
    out(0, j) = 0.0;
    for (int i = 1; i <= panel.steps(); ++i) out(i, j) = out(i - 1, j) + sqrt_h * panel.g(m, i, j);
  }
}

BrownianPath brownian_path(const SamplePanel& panel, std::size_t m) {
  BrownianPath path(panel.steps(), panel.dimension(), panel.step_size());
  brownian_path(panel, m, path);
  return path;
}

CorrelationSpec::CorrelationSpec(double rho, int dimension) : rho_(rho), dimension_(dimension) {
  if (dimension < 1) throw ConfigError("correlation: dimension must be >= 1");
  const double lower_bound = dimension > 1 ? -1.0 / (dimension - 1) : -1.0;
  if (!(rho > lower_bound && rho < 1.0) && !(dimension == 1 && std::isfinite(rho))) {
    throw ConfigError("correlation: rho=" + std::to_string(rho) + " must lie in (" +
                      std::to_string(lower_bound) + ", 1) for d=" + std::to_string(dimension));
  }
  Eigen::MatrixXd c(dimension, dimension);
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) c(i, j) = correlation(i, j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw ConfigError("correlation: matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  lower_.resize(static_cast<std::size_t>(dimension * dimension));
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) lower_[static_cast<std::size_t>(i * dimension + j)] = l(i, j);
  }
}

SamplePanel correlate(const SamplePanel& panel, const CorrelationSpec& corr) {
  const int d = panel.dimension();
  if (corr.dimension() != d) {
    throw ConfigError("correlate: correlation dimension " + std::to_string(corr.dimension()) +
                      " does not match panel dimension " + std::to_string(d));
  }
  std::vector<double> out(panel.values().begin(), panel.values().end());
  if (corr.rho() == 0.0) {
    return SamplePanel(panel.samples(), panel.steps(), d, panel.horizon(), panel.seed(), std::move(out));
  }
  const auto src = panel.values();
  const std::size_t vectors = src.size() / static_cast<std::size_t>(d);
  for (std::size_t v = 0; v < vectors; ++v) {
    const double* g = src.data() + v * static_cast<std::size_t>(d);
    double* y = out.data() + v * static_cast<std::size_t>(d);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j <= i; ++j) acc += corr.lower(i, j) * g[j];
      y[i] = acc;
    }
  }
  return SamplePanel(panel.samples(), panel.steps(), d, panel.horizon(), panel.seed(), std::move(out));
}

void write_panel(const SamplePanel& panel, std::ostream& out) {
  write_raw(out, static_cast<std::uint64_t>(panel.samples()));
  write_raw(out, static_cast<std::uint64_t>(panel.steps()));
  write_raw(out, static_cast<std::uint64_t>(panel.dimension()));
  write_raw(out, panel.horizon());
  write_raw(out, panel.seed());
  const auto v = panel.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw DataError("write_panel: stream error");
}

SamplePanel read_panel(std::istream& in) {
  const auto samples = read_raw<std::uint64_t>(in);
  const auto steps = read_raw<std::uint64_t>(in);
  const auto dimension = read_raw<std::uint64_t>(in);
  const auto horizon = read_raw<double>(in);
  const auto seed = read_raw<std::uint64_t>(in);
  if (samples == 0 || steps == 0 || dimension == 0 || steps > 65535 || dimension > 255 ||
      samples > (std::uint64_t{1} << 40) / (steps * dimension)) {
    throw DataError("read_panel: implausible header");
  }
  std::vector<double> values(samples * steps * dimension);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw DataError("read_panel: truncated body");
  return SamplePanel(samples, static_cast<int>(steps), static_cast<int>(dimension), horizon, seed,
                     std::move(values));
}

void save_panel(const SamplePanel& panel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_panel: cannot open " + path);
  write_panel(panel, out);
}

SamplePanel load_panel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_panel: cannot open " + path);
  return read_panel(in);
}

}  // namespace chaosbsde
