#include "run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>

#include "chaosbsde/errors.hpp"

namespace chaosbsde::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("key '" + key + "': expected " + expected + ", got '" + value + "'");
}

}  // namespace

double parse_real(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (used != value.size()) bad_value(key, value, "a number");
  return out;
}

// Integers may be written in scientific notation (M = 1e5) as long as the
// value is integral.
std::uint64_t parse_count(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec == std::errc() && ptr == value.data() + value.size()) return out;
  const double d = parse_real(key, value);
  if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)) || d >= 1.8e19) {
    bad_value(key, value, "a non-negative integer");
  }
  return static_cast<std::uint64_t>(d);
}

namespace {

int to_int(const std::string& key, const std::string& raw) {
  const std::uint64_t v = parse_count(key, raw);
  if (v > 1'000'000'000) bad_value(key, raw, "an integer below 1e9");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

const pt::ptree& section(const pt::ptree& tree, const std::string& name) {
  const auto it = tree.find(name);
  if (it == tree.not_found()) throw ConfigError("missing section [" + name + "]");
  return it->second;
}

std::string required(const pt::ptree& sec, const std::string& section_name, const std::string& key) {
  const auto value = sec.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
  if (!value) throw ConfigError("missing required key '" + key + "' in [" + section_name + "]");
  return *value;
}

void check_keys(const pt::ptree& sec, const std::string& section_name, const std::set<std::string>& allowed) {
  for (const auto& [key, child] : sec) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section_name + "]");
  }
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, child] : tree) {
    if (name != "problem" && name != "solver" && name != "output") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  RunConfig config;
  const auto& problem = section(tree, "problem");
  config.problem = trim(required(problem, "problem", "name"));
  for (const auto& [key, child] : problem) {
    if (key != "name") config.params[key] = parse_real(key, child.data());
  }

  const auto& solver = section(tree, "solver");
  check_keys(solver, "solver",
             {"M", "N", "p", "iterations", "T", "seed", "method", "sample_mode", "quadrature", "ridge", "threads",
              "universe_cap"});
  SolverConfig& s = config.solver;
  s.samples = parse_count("M", required(solver, "solver", "M"));
  s.basis.steps = to_int("N", required(solver, "solver", "N"));
  s.basis.order = to_int("p", required(solver, "solver", "p"));
  s.iterations = to_int("iterations", required(solver, "solver", "iterations"));
  if (auto v = solver.get_optional<std::string>("T")) s.basis.horizon = parse_real("T", *v);
  if (auto v = solver.get_optional<std::string>("seed")) s.seed = parse_count("seed", *v);
  if (auto v = solver.get_optional<std::string>("ridge")) s.ridge = parse_real("ridge", *v);
  if (auto v = solver.get_optional<std::string>("threads")) s.threads = to_int("threads", *v);
  if (auto v = solver.get_optional<std::string>("universe_cap")) s.universe_cap = parse_count("universe_cap", *v);
  if (auto v = solver.get_optional<std::string>("method")) {
    const std::string m = trim(*v);
    if (m == "mean") s.method = EstimationMethod::EmpiricalMean;
    else if (m == "saa") s.method = EstimationMethod::LeastSquares;
    else bad_value("method", m, "mean or saa");
  }
  if (auto v = solver.get_optional<std::string>("sample_mode")) {
    const std::string m = trim(*v);
    if (m == "same") s.sample_mode = SampleMode::Same;
    else if (m == "fresh") s.sample_mode = SampleMode::Fresh;
    else bad_value("sample_mode", m, "same or fresh");
  }
  if (auto v = solver.get_optional<std::string>("quadrature")) {
    const std::string m = trim(*v);
    if (m == "right") s.quadrature = Quadrature::RightEndpoint;
    else if (m == "trapezoid") s.quadrature = Quadrature::Trapezoidal;
    else bad_value("quadrature", m, "right or trapezoid");
  }

  if (const auto it = tree.find("output"); it != tree.not_found()) {
    const auto& output = it->second;
    check_keys(output, "output", {"dir", "paths", "coefficients"});
    if (auto v = output.get_optional<std::string>("dir")) config.output_dir = trim(*v);
    if (auto v = output.get_optional<std::string>("paths")) config.emit_paths = to_bool("paths", *v);
    if (auto v = output.get_optional<std::string>("coefficients")) {
      config.emit_coefficients = to_bool("coefficients", *v);
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_run_config(in, path.string());
}

ProblemInstance instantiate(RunConfig& config, const ProblemRegistry& registry) {
  ProblemInstance instance = registry.make(config.problem, config.params);
  config.solver.basis.dimension = instance.problem.dimension;
  config.solver.correlation = instance.correlation;
  config.solver.validate();
  return instance;
}

std::string to_string(EstimationMethod method) {
  return method == EstimationMethod::EmpiricalMean ? "mean" : "saa";
}
std::string to_string(SampleMode mode) { return mode == SampleMode::Same ? "same" : "fresh"; }
std::string to_string(Quadrature quadrature) {
  return quadrature == Quadrature::RightEndpoint ? "right" : "trapezoid";
}

}  // namespace chaosbsde::cli
