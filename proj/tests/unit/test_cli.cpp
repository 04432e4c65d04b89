#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chaosbsde/errors.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace chaosbsde;
using namespace chaosbsde::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chaosbsde_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kLinear =
    "[problem]\nname = linear_test\n\n[solver]\nM = 1e5\nN = 20\np = 1\niterations = 8\nseed = 12345\n";

const char* kCos =
    "[problem]\nname = cos_sup\n\n[solver]\nM = 20000\nN = 20\np = 2\niterations = 6\nseed = 12345\n";

std::string config_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_run_config(in, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("cli: config parsing") {
  std::istringstream in(
      "[problem]\nname = barrier_call\nK = 0.95\n[solver]\nM = 1e4\nN = 10\np = 2\niterations = 3\nT = 2\n"
      "seed = 99\nmethod = saa\nsample_mode = fresh\nquadrature = trapezoid\nridge = 1e-6\nthreads = 1\n"
      "[output]\ndir = somewhere\npaths = true\ncoefficients = yes\n");
  const RunConfig c = parse_run_config(in);
  CHECK(c.problem == "barrier_call");
  CHECK(c.params.at("K") == 0.95);
  CHECK(c.solver.samples == 10'000);
  CHECK(c.solver.basis.steps == 10);
  CHECK(c.solver.basis.order == 2);
  CHECK(c.solver.basis.horizon == 2.0);
  CHECK(c.solver.iterations == 3);
  CHECK(c.solver.seed == 99);
  CHECK(c.solver.method == EstimationMethod::LeastSquares);
  CHECK(c.solver.sample_mode == SampleMode::Fresh);
  CHECK(c.solver.quadrature == Quadrature::Trapezoidal);
  CHECK(c.solver.ridge == 1e-6);
  CHECK(c.solver.threads == 1);
  CHECK(c.output_dir == "somewhere");
  CHECK(c.emit_paths);
  CHECK(c.emit_coefficients);
}

TEST_CASE("cli: config diagnostics name the key or line") {
  CHECK(config_error("[problem]\nname = linear_test\n[solver]\nN = 20\np = 1\niterations = 2\n").find("'M'") !=
        std::string::npos);
  CHECK(config_error("[problem]\nname = linear_test\n[solver\nM = 10\n").find("test.ini:3") != std::string::npos);
  CHECK(config_error("[problem]\nname = x\n[solver]\nM = 10\nN = 2\np = 1\niterations = 1\nfoo = 2\n")
            .find("'foo'") != std::string::npos);
  CHECK(config_error("[problem]\nname = x\n[solver]\nM = ten\nN = 2\np = 1\niterations = 1\n").find("'M'") !=
        std::string::npos);
  CHECK(config_error("[problem]\nname = x\n[solver]\nM = 1.5\nN = 2\np = 1\niterations = 1\n").find("'M'") !=
        std::string::npos);
  CHECK(config_error("[problem]\nname = x\n[solver]\nM = 10\nN = 2\np = 1\niterations = 1\nmethod = lsq\n")
            .find("'method'") != std::string::npos);
  CHECK(config_error("[problem]\nname = x\n[solver]\nM = 10\nN = 2\np = 1\niterations = 1\n[plots]\na = 1\n")
            .find("[plots]") != std::string::npos);
  CHECK(config_error("[solver]\nM = 10\nN = 2\np = 1\niterations = 1\n").find("[problem]") != std::string::npos);
}

TEST_CASE("cli: output directory precedence") {
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir("", "") == ".");
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  CHECK(resolve_output_dir("", "") == "/tmp/from_env");
  CHECK(resolve_output_dir("", "cfg") == "cfg");
  CHECK(resolve_output_dir("cli", "cfg") == "cli");
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("cli: number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 0.95116195810143433, -1e-300, 12345.678}) {
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("cli: solve writes trace and summary") {
  const fs::path dir = scratch("solve");
  const fs::path cfg = write_file(dir / "linear.ini", kLinear);
  std::ostringstream out, err;
  SolveOptions opts;
  opts.output_dir = dir / "out";
  opts.quiet = true;
  CHECK(cmd_solve(cfg, opts, out, err) == kOk);

  const auto rows = read_csv(dir / "out" / "trace.csv");
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"q", "Y0", "Z0_1", "wall_seconds"});
  for (int q = 1; q <= 8; ++q) CHECK(rows[static_cast<std::size_t>(q)][0] == std::to_string(q));

  std::ifstream js(dir / "out" / "summary.json");
  const auto summary = nlohmann::json::parse(js);
  CHECK(summary["seed"] == 12345);
  CHECK(summary["problem"]["name"] == "linear_test");
  CHECK(summary["solver"]["M"] == 100000);
  const double y0 = summary["result"]["Y0"];
  CHECK(std::abs(y0 - std::exp(-0.05)) <= 0.01);
  CHECK(std::stod(rows[8][1]) == y0);
  CHECK(!fs::exists(dir / "out" / "paths.csv"));
}

TEST_CASE("cli: traces are identical across runs and thread counts") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_file(dir / "cos.ini", std::string(kCos) + "[output]\npaths = true\ncoefficients = true\n");
  std::ostringstream out, err;
  SolveOptions a;
  a.output_dir = dir / "a";
  a.threads = 1;
  a.quiet = true;
  SolveOptions b = a;
  b.output_dir = dir / "b";
  b.threads = 4;
  REQUIRE(cmd_solve(cfg, a, out, err) == kOk);
  REQUIRE(cmd_solve(cfg, b, out, err) == kOk);

  auto strip_time = [](std::vector<std::vector<std::string>> rows) {
    for (auto& r : rows) r.pop_back();
    return rows;
  };
  const auto ta = read_csv(dir / "a" / "trace.csv");
  CHECK(ta.size() == 7);
  CHECK(strip_time(ta) == strip_time(read_csv(dir / "b" / "trace.csv")));
  CHECK(read_csv(dir / "a" / "paths.csv") == read_csv(dir / "b" / "paths.csv"));
  CHECK(read_csv(dir / "a" / "paths.csv").size() == 20000u * 21u + 1u);

  std::ifstream ja(dir / "a" / "summary.json"), jb(dir / "b" / "summary.json");
  auto sa = nlohmann::json::parse(ja), sb = nlohmann::json::parse(jb);
  sa.erase("timing");
  sb.erase("timing");
  CHECK(sa.dump() == sb.dump());

  std::ifstream ca(dir / "a" / "coefficients.txt"), cb(dir / "b" / "coefficients.txt");
  std::stringstream sca, scb;
  sca << ca.rdbuf();
  scb << cb.rdbuf();
  CHECK(sca.str() == scb.str());
  CHECK(sca.str().find("G1^2") != std::string::npos);
}

TEST_CASE("cli: solve exit codes") {
  const fs::path dir = scratch("exit");
  std::ostringstream out, err;
  SolveOptions opts;
  opts.output_dir = dir / "out";
  opts.quiet = true;

  const fs::path missing = write_file(dir / "missing.ini", "[problem]\nname = linear_test\n[solver]\nN = 20\np = 1\niterations = 2\n");
  CHECK(guarded([&] { return cmd_solve(missing, opts, out, err); }, err) == kConfigError);
  CHECK(err.str().find("'M'") != std::string::npos);
  CHECK(!fs::exists(dir / "out" / "trace.csv"));

  const fs::path bad_problem = write_file(dir / "bad.ini", "[problem]\nname = heston\n[solver]\nM = 10\nN = 2\np = 1\niterations = 1\n");
  CHECK(guarded([&] { return cmd_solve(bad_problem, opts, out, err); }, err) == kConfigError);
  CHECK(guarded([&] { return cmd_solve(dir / "nope.ini", opts, out, err); }, err) == kConfigError);

  // A huge negative rate makes the linear driver explode.
  const fs::path blowup = write_file(
      dir / "blowup.ini", "[problem]\nname = linear_test\nr = -1e9\n[solver]\nM = 100\nN = 4\np = 1\niterations = 3\n");
  err.str("");
  CHECK(guarded([&] { return cmd_solve(blowup, opts, out, err); }, err) == kNumericalError);
  CHECK(err.str().find("blow-up") != std::string::npos);
}

TEST_CASE("cli: sweep along q replays one trace") {
  const fs::path dir = scratch("sweep_q");
  const fs::path cfg = write_file(dir / "cos.ini", kCos);
  std::ostringstream out, err;
  SolveOptions solve_opts;
  solve_opts.output_dir = dir / "solve";
  solve_opts.quiet = true;
  REQUIRE(cmd_solve(cfg, solve_opts, out, err) == kOk);

  SweepOptions sweep_opts;
  sweep_opts.axis = "q";
  sweep_opts.values = {"1", "2", "3", "4", "5", "6"};
  sweep_opts.output_dir = dir / "sweep";
  REQUIRE(cmd_sweep(cfg, sweep_opts, out, err) == kOk);

  const auto trace = read_csv(dir / "solve" / "trace.csv");
  const auto sweep = read_csv(dir / "sweep" / "sweep.csv");
  REQUIRE(sweep.size() == 7);
  CHECK(sweep[0] == std::vector<std::string>{"q", "Y0", "Z0_1", "wall_seconds", "seed", "status"});
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(sweep[k][0] == trace[k][0]);
    CHECK(sweep[k][1] == trace[k][1]);
    CHECK(sweep[k][2] == trace[k][2]);
    CHECK(sweep[k][4] == "12345");
    CHECK(sweep[k][5] == "ok");
  }
}

TEST_CASE("cli: sweep records failing points and continues") {
  const fs::path dir = scratch("sweep_p");
  const fs::path cfg = write_file(dir / "cos.ini",
                                  "[problem]\nname = cos_sup\n[solver]\nM = 2000\nN = 4\np = 1\niterations = 2\n");
  std::ostringstream out, err;
  SweepOptions opts;
  opts.axis = "p";
  opts.values = {"1", "9", "2"};
  opts.output_dir = dir;
  CHECK(cmd_sweep(cfg, opts, out, err) == kNumericalError);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][5] == "ok");
  CHECK(rows[2][1] == "nan");
  CHECK(rows[2][5].rfind("error:", 0) == 0);
  CHECK(rows[3][5] == "ok");
  CHECK(rows[1][4] != rows[3][4]);
  CHECK(rows[1][4] == std::to_string(sweep_seed(0, "p", 1)));

  opts.axis = "X";
  CHECK(guarded([&] { return cmd_sweep(cfg, opts, out, err); }, err) == kConfigError);
}

TEST_CASE("cli: validation fails when underpowered") {
  ValidateOptions opts;
  opts.fast = true;
  opts.samples = 100;
  std::ostringstream out, err;
  CHECK(cmd_validate(opts, out, err) == kValidationFailure);
  CHECK(out.str().find("zero_problem                PASS") != std::string::npos);
  CHECK(out.str().find("FAIL") != std::string::npos);
}

TEST_CASE("cli: oracle command") {
  std::ostringstream out, err;
  CHECK(cmd_oracle("linear", {"r=0.05", "T=1", "c=1"}, out, err) == kOk);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["value"].get<double>() == doctest::Approx(0.951229424500714).epsilon(1e-15));
  CHECK(guarded([&] { return cmd_oracle("linear", {"q=1"}, out, err); }, err) == kConfigError);
  CHECK(guarded([&] { return cmd_oracle("linear", {"r"}, out, err); }, err) == kConfigError);
  CHECK(guarded([&] { return cmd_oracle("heston", {}, out, err); }, err) == kConfigError);
  CHECK(guarded([&] { return cmd_oracle("barrier_call", {"paths=100"}, out, err); }, err) == kConfigError);
}
