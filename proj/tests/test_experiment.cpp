#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmfg/errors.hpp"
#include "fbmfg/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fbmfg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fbmfg_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// history.csv without the elapsed column.
std::string history_without_time(const fs::path& p) {
  std::istringstream is(slurp(p));
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_CASE("config parsing and overrides") {
  const ExperimentConfig c = parse_config(
      "# diffusion run\n"
      "problem = power-entropy\n"
      "n = 30   # coarse\n"
      "nu=0.5\n"
      "epsilon = 0.1\n"
      "algorithm = DR\n"
      "gamma = 0.95\n"
      "tol_kind = relative_successive\n"
      "max-iter = 77\n"
      "seed = 12345678901\n"
      "output_dir = /tmp/x\n");
  CHECK(c.problem == ProblemKind::PowerEntropy);
  CHECK(c.n == 30);
  CHECK(c.nu == 0.5);
  CHECK(c.epsilon == 0.1);
  CHECK(c.algorithm == Algorithm::DR);
  CHECK(*c.gamma == 0.95);
  CHECK(c.max_iter == 77);
  CHECK(c.seed == 12345678901ULL);
  CHECK(c.output_dir == "/tmp/x");
  CHECK(c.problems().empty());

  ExperimentConfig d = c;
  d.set("gamma", "auto");
  CHECK(d.gamma_auto);
  CHECK_FALSE(d.gamma.has_value());

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ContractError);
  CHECK_THROWS_AS(parse_config("n 4\n"), ContractError);
  CHECK_THROWS_AS(parse_config("n = four\n"), ContractError);
}

TEST_CASE("validation lists every problem") {
  ExperimentConfig c;
  c.problem = ProblemKind::PowerEntropy;
  c.alpha = 3.0;
  c.gamma_auto = true;
  c.tol = -1.0;
  c.n = 1;
  const auto errs = c.problems();
  CHECK(errs.size() >= 5);
  try {
    c.validate();
    FAIL("validate accepted a broken config");
  } catch (const ContractError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("tol must be positive") != std::string::npos);
    CHECK(msg.find("n must be") != std::string::npos);
    CHECK(msg.find("gamma-auto") != std::string::npos);
  }
}

TEST_CASE("random initialization") {
  const Vector xs = explicit_solution_log(6).stacked();
  const Vector a = random_init(xs, 0.1, 7), b = random_init(xs, 0.1, 7), c = random_init(xs, 0.1, 8);
  CHECK(std::abs((a - xs).norm() - 0.1) <= 1e-12);
  CHECK(a == b);
  CHECK((a - c).norm() > 1e-3);
  CHECK_THROWS_AS(random_init(xs, 0.0, 1), ContractError);
}

TEST_CASE("history CSV") {
  std::vector<ConvergenceRow> one(1);
  one[0].iteration = 0;
  one[0].exact_error = 0.1;
  one[0].elapsed = 0.0;
  std::ostringstream os;
  write_history(os, one);
  CHECK(os.str() == "iteration,exact_error,relative_change,bound,elapsed_s\n0,0.10000000000000001,,,0\n");

  std::vector<ConvergenceRow> rows(2);
  rows[1].iteration = 1;
  rows[1].relative_change = 1.0 / 3.0;
  rows[1].bound = std::exp(-1.0);
  std::ostringstream rt;
  write_history(rt, rows);
  std::istringstream is(rt.str());
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  std::getline(is, line);
  std::stringstream fields(line);
  std::string f;
  std::vector<std::string> parts;
  while (std::getline(fields, f, ',')) parts.push_back(f);
  REQUIRE(parts.size() == 5u);
  CHECK(std::stod(parts[2]) == 1.0 / 3.0);
  CHECK(std::stod(parts[3]) == std::exp(-1.0));
  CHECK(parts[1].empty());
  CHECK_THROWS(emit_history(rows, "/nonexistent-dir/h.csv"));
}

TEST_CASE("run on the two-node-per-side log example") {
  ExperimentConfig c;
  c.n = 2;
  c.gamma = 0.5;
  c.tol = 1e-10;
  c.output_dir = scratch("n2").string();
  const ExperimentResult r = run_experiment(c);
  CHECK(r.converged);
  CHECK(r.report.final_point.norm() < 1e-10);
  std::ifstream m(fs::path(c.output_dir) / "m.grid");
  const GridFunction mg = read_grid(m);
  CHECK((mg.data.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(fs::exists(fs::path(c.output_dir) / "w.grid"));
  CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "u.grid"));
  const auto j = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "summary.json"));
  CHECK(j["converged"] == true);
  CHECK(j["mass"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("power-entropy run with diffusion dumps a positive unit-mass density") {
  ExperimentConfig c;
  c.problem = ProblemKind::PowerEntropy;
  c.n = 60;
  c.nu = 0.5;
  c.epsilon = 0.1;
  c.gamma = 0.65;
  c.tol = 1.0 / (60.0 * 60.0 * 60.0);
  c.output_dir = scratch("pe").string();
  const ExperimentResult r = run_experiment(c);
  CHECK(r.converged);
  CHECK(r.report.iterations >= 7);
  CHECK(r.report.iterations <= 13);
  std::ifstream m(fs::path(c.output_dir) / "m.grid");
  const GridFunction mg = read_grid(m);
  CHECK(mg.data.minCoeff() > 0.0);
  CHECK(mg.sum() / (60.0 * 60.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fs::exists(fs::path(c.output_dir) / "u.grid"));
  CHECK(r.hjb.has_value());
}

TEST_CASE("identical configs give identical outputs") {
  for (Algorithm a : {Algorithm::DFB1, Algorithm::DR}) {
    ExperimentConfig c;
    c.n = 12;
    c.algorithm = a;
    c.gamma = 0.3;
    c.init_radius = 0.5;
    c.seed = 99;
    c.tol = 1e-9;
    c.output_dir = scratch("det_a").string();
    run_experiment(c);
    ExperimentConfig d = c;
    d.output_dir = scratch("det_b").string();
    run_experiment(d);
    for (const char* f : {"m.grid", "w.grid"})
      CHECK(slurp(fs::path(c.output_dir) / f) == slurp(fs::path(d.output_dir) / f));
    CHECK(history_without_time(fs::path(c.output_dir) / "history.csv") ==
          history_without_time(fs::path(d.output_dir) / "history.csv"));
  }
}

TEST_CASE("bound column appears only for strongly convex runs") {
  ExperimentConfig c;
  c.n = 10;
  c.init_radius = 0.1;
  c.gamma_auto = true;
  c.tol_kind = TolKind::ExactError;
  c.tol = 1e-6;
  c.algorithm = Algorithm::DFB0;
  const ExperimentResult r0 = run_experiment(c, false);
  CHECK(r0.rho.has_value());
  for (const auto& h : r0.report.history) CHECK(h.bound.has_value());
  c.algorithm = Algorithm::DFB1;
  const ExperimentResult r1 = run_experiment(c, false);
  CHECK_FALSE(r1.rho.has_value());
  for (const auto& h : r1.report.history) CHECK_FALSE(h.bound.has_value());
}

TEST_CASE("auto step at N = 60") {
  ExperimentConfig c;
  c.n = 60;
  c.gamma_auto = true;
  for (double m0 : {0.1, 0.5}) {
    c.init_radius = m0;
    const LocalConstants lc = local_constants_log(60, m0);
    CHECK(resolve_gamma(c) == doctest::Approx(2.0 / (lc.lip + lc.mu)));
  }
}

TEST_CASE("DFB0 at N = 60 from radius 0.1 with the automatic step") {
  ExperimentConfig c;
  c.n = 60;
  c.algorithm = Algorithm::DFB0;
  c.gamma_auto = true;
  c.init_radius = 0.1;
  c.seed = 1;
  c.tol_kind = TolKind::ExactError;
  c.tol = 7e-5;
  const ExperimentResult r = run_experiment(c, false);
  CHECK(r.converged);
  CHECK(r.report.iterations >= 107);
  CHECK(r.report.iterations <= 199);
}
