#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "chaosbsde/brownian.hpp"
#include "chaosbsde/chaos.hpp"
#include "chaosbsde/errors.hpp"
#include "chaosbsde/oracle.hpp"

namespace chaosbsde::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  return out;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

// CSV cells never carry commas or quotes in our tables; errors are flattened.
std::string csv_cell(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '"', '\'');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

json config_echo(const RunConfig& config) {
  const SolverConfig& s = config.solver;
  json params = json::object();
  for (const auto& [k, v] : config.params) params[k] = v;
  return json{{"problem", {{"name", config.problem}, {"params", params}}},
              {"solver",
               {{"M", s.samples},
                {"N", s.basis.steps},
                {"p", s.basis.order},
                {"d", s.basis.dimension},
                {"T", s.basis.horizon},
                {"iterations", s.iterations},
                {"method", to_string(s.method)},
                {"sample_mode", to_string(s.sample_mode)},
                {"quadrature", to_string(s.quadrature)},
                {"ridge", s.ridge}}}};
}

}  // namespace

fs::path resolve_output_dir(const fs::path& override_dir, const fs::path& config_dir) {
  if (!override_dir.empty()) return override_dir;
  if (!config_dir.empty()) return config_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SolveOutcome run_solve(RunConfig& config, const ProblemRegistry& registry,
                       const std::function<void(const SolverState&)>& on_iteration) {
  const auto start = Clock::now();
  SolveOutcome outcome;
  outcome.instance = instantiate(config, registry);
  outcome.solver = std::make_unique<PicardSolver>(outcome.instance.problem, config.solver);
  outcome.state = outcome.solver->solve(on_iteration);
  if (outcome.instance.derived && !outcome.state.traces.empty()) {
    const auto& last = outcome.state.traces.back();
    outcome.derived = outcome.instance.derived(last.y0, last.z0);
  }
  outcome.total_seconds = seconds_since(start);
  return outcome;
}

void write_trace_header(std::ostream& out, int dimension) {
  out << "q,Y0";
  for (int l = 1; l <= dimension; ++l) out << ",Z0_" << l;
  out << ",wall_seconds\n";
}

void write_trace_row(std::ostream& out, const IterationTrace& trace) {
  out << trace.iteration << ',' << format_real(trace.y0);
  for (double z : trace.z0) out << ',' << format_real(z);
  out << ',' << format_real(trace.wall_seconds) << '\n';
}

void write_paths_csv(std::ostream& out, const PathGrid& grid) {
  out << "m,j,Y";
  for (int l = 1; l <= grid.dimension; ++l) out << ",Z_" << l;
  out << '\n';
  for (std::size_t m = 0; m < grid.samples; ++m) {
    for (int j = 0; j <= grid.steps; ++j) {
      out << m << ',' << j << ',' << format_real(grid.y_at(m, j));
      for (int l = 0; l < grid.dimension; ++l) out << ',' << format_real(grid.z_at(m, j, l));
      out << '\n';
    }
  }
}

std::string summary_json(const RunConfig& config, const SolveOutcome& outcome) {
  json doc = config_echo(config);
  doc["seed"] = config.solver.seed;
  json result = json::object();
  if (!outcome.state.traces.empty()) {
    const auto& last = outcome.state.traces.back();
    result["iterations"] = last.iteration;
    result["Y0"] = last.y0;
    result["Y0_std_error"] = last.y0_std_error;
    result["Z0"] = last.z0;
  }
  result["universe_size"] = outcome.solver ? outcome.solver->universe().size() : 0;
  doc["result"] = result;
  json derived = json::object();
  for (const auto& [k, v] : outcome.derived) derived[k] = v;
  doc["derived"] = derived;
  json per_iteration = json::array();
  for (const auto& t : outcome.state.traces) {
    per_iteration.push_back(
        {{"q", t.iteration}, {"estimate_seconds", t.estimate_seconds}, {"update_seconds", t.update_seconds}});
  }
  doc["timing"] = {{"setup_seconds", outcome.state.setup_seconds},
                   {"total_seconds", outcome.total_seconds},
                   {"per_iteration", per_iteration}};
  return doc.dump(2) + "\n";
}

int cmd_solve(const fs::path& config_path, const SolveOptions& options, std::ostream& out, std::ostream&) {
  RunConfig config = load_run_config(config_path);
  if (options.threads) config.solver.threads = *options.threads;
  const fs::path dir = resolve_output_dir(options.output_dir, config.output_dir);
  const ProblemRegistry registry = ProblemRegistry::builtin();

  // Validate everything before touching the output directory.
  RunConfig probe = config;
  instantiate(probe, registry);
  prepare_dir(dir);

  std::ofstream trace = open_output(dir / "trace.csv");
  write_trace_header(trace, probe.solver.basis.dimension);
  trace.flush();
  SolveOutcome outcome = run_solve(config, registry, [&](const SolverState& state) {
    const IterationTrace& t = state.traces.back();
    write_trace_row(trace, t);
    trace.flush();
    if (!options.quiet) {
      out << "q=" << t.iteration << " Y0=" << format_real(t.y0);
      for (std::size_t l = 0; l < t.z0.size(); ++l) out << " Z0_" << l + 1 << '=' << format_real(t.z0[l]);
      out << " (" << std::fixed << std::setprecision(2) << t.wall_seconds << " s)" << std::defaultfloat
          << std::setprecision(6) << '\n';
    }
  });

  open_output(dir / "summary.json") << summary_json(config, outcome);
  if (config.emit_paths) {
    std::ofstream paths = open_output(dir / "paths.csv");
    write_paths_csv(paths, outcome.state.grid);
  }
  if (config.emit_coefficients && outcome.state.coefficients) {
    std::ofstream coeffs = open_output(dir / "coefficients.txt");
    write_coefficients_text(*outcome.state.coefficients, outcome.solver->universe(), coeffs);
  }
  if (!options.quiet) {
    for (const auto& [k, v] : outcome.derived) out << k << '=' << format_real(v) << '\n';
    out << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "summary.json").string() << '\n';
  }
  return kOk;
}

std::uint64_t sweep_seed(std::uint64_t base, const std::string& axis, std::uint64_t value) {
  if (axis == "q") return base;
  const std::uint64_t tag = axis.empty() ? 0 : static_cast<unsigned char>(axis[0]);
  return mix_seed(base, (tag << 56) ^ value);
}

int cmd_sweep(const fs::path& config_path, const SweepOptions& options, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, int> kAxes{{"M", 0}, {"N", 1}, {"p", 2}, {"q", 3}};
  if (!kAxes.count(options.axis)) throw ConfigError("unknown sweep axis '" + options.axis + "' (M, N, p or q)");
  if (options.values.empty()) throw ConfigError("sweep needs at least one value");

  RunConfig base = load_run_config(config_path);
  if (options.threads) base.solver.threads = *options.threads;
  const ProblemRegistry registry = ProblemRegistry::builtin();
  {
    RunConfig probe = base;
    instantiate(probe, registry);
    base.solver.basis.dimension = probe.solver.basis.dimension;
  }
  std::vector<std::uint64_t> values;
  for (const auto& v : options.values) values.push_back(parse_count(options.axis, v));

  const fs::path dir = resolve_output_dir(options.output_dir, base.output_dir);
  prepare_dir(dir);
  std::ofstream csv = open_output(dir / "sweep.csv");
  const int d = base.solver.basis.dimension;
  csv << options.axis << ",Y0";
  for (int l = 1; l <= d; ++l) csv << ",Z0_" << l;
  csv << ",wall_seconds,seed,status\n";
  csv.flush();

  int failures = 0;
  for (const std::uint64_t value : values) {
    RunConfig point = base;
    point.solver.seed = sweep_seed(base.solver.seed, options.axis, value);
    switch (kAxes.at(options.axis)) {
      case 0: point.solver.samples = value; break;
      case 1: point.solver.basis.steps = static_cast<int>(std::min<std::uint64_t>(value, 1u << 30)); break;
      case 2: point.solver.basis.order = static_cast<int>(std::min<std::uint64_t>(value, 1u << 30)); break;
      default: point.solver.iterations = static_cast<int>(std::min<std::uint64_t>(value, 1u << 30)); break;
    }
    const auto start = Clock::now();
    csv << value;
    try {
      const SolveOutcome outcome = run_solve(point, registry);
      const auto& last = outcome.state.traces.back();
      csv << ',' << format_real(last.y0);
      for (double z : last.z0) csv << ',' << format_real(z);
      csv << ',' << format_real(outcome.total_seconds) << ',' << point.solver.seed << ",ok\n";
      out << options.axis << '=' << value << " Y0=" << format_real(last.y0) << '\n';
    } catch (const std::exception& e) {
      ++failures;
      csv << ",nan";
      for (int l = 0; l < d; ++l) csv << ",nan";
      csv << ',' << format_real(seconds_since(start)) << ',' << point.solver.seed << ",error: " << csv_cell(e.what())
          << '\n';
      err << options.axis << '=' << value << " failed: " << e.what() << '\n';
    }
    csv.flush();
  }
  out << "wrote " << (dir / "sweep.csv").string() << '\n';
  return failures == 0 ? kOk : kNumericalError;
}

std::vector<ValidationCheck> run_validation(const ValidateOptions& options,
                                            const std::function<void(const ValidationCheck&)>& on_check) {
  std::vector<ValidationCheck> checks;
  auto samples = [&](std::size_t full, std::size_t fast) {
    return options.samples.value_or(options.fast ? fast : full);
  };
  auto base_config = [&](int p, int n, int iterations, std::size_t m) {
    SolverConfig c;
    c.basis = ChaosBasis{1.0, n, 1, p};
    c.iterations = iterations;
    c.samples = m;
    c.seed = options.seed;
    c.threads = options.threads;
    return c;
  };
  auto record = [&](ValidationCheck check) {
    if (on_check) on_check(check);
    checks.push_back(std::move(check));
  };
  auto attempt = [&](const std::string& name, const std::function<ValidationCheck()>& body) {
    try {
      record(body());
    } catch (const std::exception& e) {
      record({name, false, std::nan(""), 0.0, std::string("error: ") + e.what()});
    }
  };

  attempt("zero_problem", [&] {
    const ProblemInstance inst = make_zero_test(1);
    const SolverState s = PicardSolver(inst.problem, base_config(2, 10, 3, 1000)).solve();
    double worst = 0.0;
    for (double v : s.grid.y) worst = std::max(worst, std::abs(v));
    for (double v : s.grid.z) worst = std::max(worst, std::abs(v));
    return ValidationCheck{"zero_problem", worst == 0.0, worst, 0.0, "max |Y|, |Z| over the grid"};
  });

  attempt("linear_closed_form", [&] {
    const ProblemInstance inst = make_linear_test(0.05, 1.0);
    const SolverState s = PicardSolver(inst.problem, base_config(1, 20, 8, samples(100'000, 20'000))).solve();
    const double ref = linear_bsde_closed_form(0.05, 1.0, 1.0).value;
    const double err = std::abs(s.traces.back().y0 - ref);
    return ValidationCheck{"linear_closed_form", err <= 0.01, err, 0.01, "|Y0 - exp(-0.05)|"};
  });

  attempt("martingale_representation", [&] {
    const ProblemInstance inst = make_martingale_test();
    const PicardSolver solver(inst.problem, base_config(1, 20, 1, samples(100'000, 20'000)));
    const SolverState s = solver.solve();
    double ey = 0.0, ez = 0.0;
    BrownianPath path;
    const std::size_t m_count = s.grid.samples;
    for (std::size_t m = 0; m < m_count; ++m) {
      brownian_path(solver.panel(), m, path);
      for (int j = 0; j <= s.grid.steps; ++j) {
        ey += std::abs(s.grid.y_at(m, j) - path(j, 0));
        ez += std::abs(s.grid.z_at(m, j, 0) - 1.0);
      }
    }
    const double cells = static_cast<double>(m_count) * (s.grid.steps + 1);
    const double worst = std::max(ey, ez) / cells;
    std::ostringstream detail;
    detail << "mean |Y - B| = " << format_real(ey / cells) << ", mean |Z - 1| = " << format_real(ez / cells);
    return ValidationCheck{"martingale_representation", worst <= 0.05, worst, 0.05, detail.str()};
  });

  attempt("barrier_vs_monte_carlo", [&] {
    const BarrierCallParams params;
    const ProblemInstance inst = make_barrier_call(params);
    const SolverState s = PicardSolver(inst.problem, base_config(2, 20, 5, samples(1'000'000, 100'000))).solve();
    const ReferenceValue ref =
        barrier_call_mc(params, 1.0, 20, options.fast ? 400'000 : 2'000'000, options.seed, options.threads);
    const double err = std::abs(s.traces.back().y0 - ref.value);
    const double tol = 2e-3 + ref.half_width;
    return ValidationCheck{"barrier_vs_monte_carlo", err <= tol, err, tol,
                           "|Y0 - MC| with MC = " + format_real(ref.value)};
  });

  attempt("basket_linear_reduction", [&] {
    BasketPutParams params;
    params.borrow_rate = params.rate;
    const ProblemInstance inst = make_basket_put(params);
    SolverConfig c = base_config(2, 20, 5, samples(50'000, 10'000));
    c.basis.dimension = params.assets;
    c.correlation = inst.correlation;
    const SolverState s = PicardSolver(inst.problem, c).solve();
    const ReferenceValue ref =
        basket_put_linear_mc(params, 1.0, options.fast ? 200'000 : 2'000'000, options.seed, options.threads);
    const double err = std::abs(s.traces.back().y0 - ref.value);
    const double tol = 3.0 * (2.5758293035489 * s.traces.back().y0_std_error + ref.half_width);
    return ValidationCheck{"basket_linear_reduction", err <= tol, err, tol,
                           "|Y0 - MC| with MC = " + format_real(ref.value)};
  });

  return checks;
}

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream&) {
  out << std::left << std::setw(28) << "check" << std::setw(6) << "result" << "  " << std::setw(24) << "measured"
      << std::setw(26) << "tolerance" << "detail\n";
  const auto checks = run_validation(options, [&](const ValidationCheck& c) {
    out << std::left << std::setw(28) << c.name << std::setw(6) << (c.passed ? "PASS" : "FAIL") << "  "
        << std::setw(24) << format_real(c.measured) << std::setw(26) << format_real(c.tolerance) << c.detail
        << std::endl;
  });
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  out << (ok ? "all checks passed" : "validation failed") << '\n';
  return ok ? kOk : kValidationFailure;
}

int cmd_oracle(const std::string& name, const std::vector<std::string>& params, std::ostream& out, std::ostream&) {
  std::map<std::string, std::string> kv;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("oracle parameter '" + p + "' is not key=value");
    kv[p.substr(0, eq)] = p.substr(eq + 1);
  }
  auto take_real = [&](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = parse_real(key, it->second);
    kv.erase(it);
    return v;
  };
  auto take_count = [&](const std::string& key, std::uint64_t fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::uint64_t v = parse_count(key, it->second);
    kv.erase(it);
    return v;
  };

  ReferenceValue ref;
  json echo = json::object();
  if (name == "linear") {
    const double r = take_real("r", 0.05), t = take_real("T", 1.0), c = take_real("c", 1.0);
    echo = {{"r", r}, {"T", t}, {"c", c}};
    if (kv.empty()) ref = linear_bsde_closed_form(r, t, c);
  } else if (name == "barrier_call") {
    BarrierCallParams b;
    b.spot = take_real("S0", b.spot);
    b.rate = take_real("r", b.rate);
    b.vol = take_real("sigma", b.vol);
    b.strike = take_real("K", b.strike);
    b.barrier = take_real("L", b.barrier);
    const double t = take_real("T", 1.0);
    const auto n = take_count("N", 20);
    const auto paths = take_count("paths", 1'000'000);
    const auto seed = take_count("seed", 12345);
    const auto threads = take_count("threads", 0);
    echo = {{"S0", b.spot}, {"r", b.rate}, {"sigma", b.vol}, {"K", b.strike}, {"L", b.barrier},
            {"T", t},       {"N", n},      {"seed", seed}};
    if (n > 1'000'000) throw ConfigError("key 'N': too many monitoring dates");
    if (kv.empty()) ref = barrier_call_mc(b, t, static_cast<int>(n), paths, seed, static_cast<int>(threads));
  } else if (name == "basket_put") {
    BasketPutParams b;
    b.assets = static_cast<int>(std::min<std::uint64_t>(take_count("d", 5), 255));
    b.spot = take_real("S0", b.spot);
    b.rate = take_real("r", b.rate);
    b.vol = take_real("sigma", b.vol);
    b.strike = take_real("K", b.strike);
    b.rho = take_real("rho", b.rho);
    const double t = take_real("T", 1.0);
    const auto paths = take_count("paths", 1'000'000);
    const auto seed = take_count("seed", 12345);
    const auto threads = take_count("threads", 0);
    echo = {{"d", b.assets}, {"S0", b.spot}, {"r", b.rate}, {"sigma", b.vol},
            {"K", b.strike}, {"rho", b.rho}, {"T", t},      {"seed", seed}};
    if (kv.empty()) ref = basket_put_linear_mc(b, t, paths, seed, static_cast<int>(threads));
  } else {
    throw ConfigError("unknown oracle '" + name + "' (linear, barrier_call, basket_put)");
  }
  if (!kv.empty()) throw ConfigError("unknown oracle parameter '" + kv.begin()->first + "' for " + name);

  const json doc = {{"oracle", name},
                    {"params", echo},
                    {"value", ref.value},
                    {"half_width_99", ref.half_width},
                    {"method", to_string(ref.method)},
                    {"paths", ref.paths}};
  out << doc.dump(2) << '\n';
  return kOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace chaosbsde::cli
