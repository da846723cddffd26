#include "fbmfg/acceptance.hpp"
#include "fbmfg/errors.hpp"
#include "fbmfg/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace fbmfg;

namespace {

// Flags named exactly like the config keys.
const std::vector<std::string> kConfigKeys{
    "problem", "algorithm", "n",    "nu",   "epsilon",     "alpha",     "gamma",
    "tol",     "tol-kind",  "max-iter", "seed", "init-radius", "output-dir"};

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool gamma_auto = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : kConfigKeys) app->add_option("--" + key, values[key]);
    app->add_flag("--gamma-auto", gamma_auto, "optimal step from the local constants");
  }

  ExperimentConfig build(CLI::App* app) const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& key : kConfigKeys)
      if (app->count("--" + key) > 0) cfg.set(key, values.at(key));
    if (gamma_auto) cfg.set("gamma", "auto");
    return cfg;
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(std::stod(item));
      continue;
    }
    // lo:step:hi
    const auto colon2 = item.find(':', colon + 1);
    if (colon2 == std::string::npos) throw ContractError("range must be lo:step:hi, got " + item);
    const double lo = std::stod(item.substr(0, colon));
    const double step = std::stod(item.substr(colon + 1, colon2 - colon - 1));
    const double hi = std::stod(item.substr(colon2 + 1));
    if (!(step > 0.0)) throw ContractError("range step must be positive");
    for (int k = 0; lo + k * step <= hi + 1e-12; ++k)
      out.push_back(std::round((lo + k * step) * 1e10) / 1e10);
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

int cmd_run(const ExperimentConfig& cfg) {
  const ExperimentResult res = run_experiment(cfg);
  std::cout << to_string(cfg.algorithm) << " gamma=" << res.gamma
            << " iterations=" << res.report.iterations
            << (res.converged ? " converged" : " NOT converged") << " in " << res.report.elapsed
            << " s\n";
  for (const auto& f : res.files) std::cout << "  wrote " << f << "\n";
  return res.converged ? 0 : 2;
}

// Log example at both radii and both placements, with full histories,
// at the near-critical step 1.99 / L.
int sweep_explicit(const ExperimentConfig& base) {
  const fs::path out = base.output_dir;
  fs::create_directories(out);
  std::ofstream table = open_out(out / "explicit.csv");
  table << "algorithm,init_radius,gamma,gamma_star,iterations,time_s,converged\n";
  bool all = true;
  for (double radius : {0.1, 0.5}) {
    const LocalConstants lc = local_constants_log(base.n, radius);
    const double g_crit = near_critical_step(lc.lip);
    const double g_star = optimal_step(lc.mu, lc.lip).gamma_star;
    for (Algorithm alg : {Algorithm::DFB0, Algorithm::DFB1}) {
      ExperimentConfig cfg = base;
      cfg.problem = ProblemKind::GomesLog;
      cfg.nu = 0.0;
      cfg.algorithm = alg;
      cfg.gamma = g_crit;
      cfg.gamma_auto = false;
      cfg.tol_kind = TolKind::ExactError;
      cfg.init_radius = radius;
      std::ostringstream dir;
      dir << to_string(alg) << "_r" << radius;
      cfg.output_dir = (out / dir.str()).string();
      const ExperimentResult res = run_experiment(cfg);
      all = all && res.converged;
      table << to_string(alg) << "," << radius << "," << std::setprecision(6) << g_crit << ","
            << g_star << "," << res.report.iterations << "," << res.report.elapsed << ","
            << (res.converged ? 1 : 0) << "\n";
      std::cout << dir.str() << ": gamma=" << g_crit << " iterations=" << res.report.iterations
                << " time=" << res.report.elapsed << " s\n";
    }
  }
  std::cout << "wrote " << (out / "explicit.csv").string() << "\n";
  return all ? 0 : 2;
}

void write_harness(const HarnessResult& res, const fs::path& out) {
  fs::create_directories(out);
  std::ofstream rec = open_out(out / "records.csv");
  write_records_csv(rec, res.runs);
  std::ofstream best = open_out(out / "best.csv");
  write_records_csv(best, res.best);
  write_records_csv(std::cout, res.best);
  std::cout << "wrote " << (out / "records.csv").string() << ", " << (out / "best.csv").string()
            << "\n";
}

int sweep_comparison(const ExperimentConfig& base, int repeats) {
  const auto steps = [](double lo, double hi) {
    std::vector<double> g;
    for (int k = 0; lo + 0.05 * k <= hi + 1e-12; ++k) g.push_back(std::round((lo + 0.05 * k) * 100) / 100);
    return g;
  };
  std::vector<HarnessProblem> problems;
  for (double eps : {0.0, 0.1, 0.5})
    for (double nu : {0.1, 0.5})
      problems.push_back({Coupling::power_entropy(base.n, base.alpha, eps), nu});
  HarnessOptions opt;
  opt.max_iter = base.max_iter;
  opt.timing_repeats = repeats;
  const auto res = harness_run(problems, {Algorithm::CP, Algorithm::DR, Algorithm::DFB0, Algorithm::DFB1},
                               {steps(0.5, 1.5), steps(0.5, 1.5), steps(0.4, 1.4), steps(0.4, 1.4)}, opt);
  write_harness(res, base.output_dir);
  return 0;
}

int sweep_custom(const ExperimentConfig& cfg, const std::string& algorithms,
                 const std::string& gammas, int repeats) {
  if (gammas.empty()) throw ContractError("sweep needs --gammas or --preset");
  const std::vector<double> grid = parse_list(gammas);
  std::vector<Algorithm> algs;
  std::vector<std::vector<double>> per_alg;
  std::stringstream ss(algorithms.empty() ? to_string(cfg.algorithm) : algorithms);
  std::string item;
  while (std::getline(ss, item, ',')) {
    algs.push_back(parse_algorithm(item));
    per_alg.push_back(grid);
  }
  const Coupling c = cfg.problem == ProblemKind::GomesLog
                         ? Coupling::log_gomes(cfg.n)
                         : Coupling::power_entropy(cfg.n, cfg.alpha, cfg.epsilon);
  HarnessOptions opt;
  opt.max_iter = cfg.max_iter;
  opt.timing_repeats = repeats;
  if (cfg.tol_kind == TolKind::RelativeSuccessive) opt.tol = cfg.tol;
  write_harness(harness_run({{c, cfg.nu}}, algs, per_alg, opt), cfg.output_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-backward splitting for dual finite-difference ergodic MFGs"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "single experiment");
  run_flags.attach(run);

  ConfigFlags sweep_flags;
  std::string preset, algorithms, gammas;
  int repeats = 3;
  CLI::App* sweep = app.add_subcommand("sweep", "step-size and parameter grids");
  sweep_flags.attach(sweep);
  sweep->add_option("--preset", preset, "explicit or comparison")
      ->check(CLI::IsMember({"explicit", "comparison"}));
  sweep->add_option("--algorithms", algorithms, "comma separated, e.g. DR,DFB1");
  sweep->add_option("--gammas", gammas, "comma separated values or lo:step:hi ranges");
  sweep->add_option("--repeats", repeats, "timing repeats of the best run")->check(CLI::PositiveNumber);

  std::vector<int> ids;
  CLI::App* check = app.add_subcommand("check", "acceptance checks, PASS/FAIL per line");
  check->add_option("ids", ids, "criterion ids (default all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags.build(run));
    if (*sweep) {
      ExperimentConfig cfg = sweep_flags.build(sweep);
      if (preset == "explicit") return sweep_explicit(cfg);
      if (preset == "comparison") return sweep_comparison(cfg, repeats);
      // The grid replaces the single gamma.
      if (!gammas.empty() && !cfg.gamma && !cfg.gamma_auto) cfg.gamma = parse_list(gammas).front();
      cfg.validate();
      return sweep_custom(cfg, algorithms, gammas, repeats);
    }
    if (*check) {
      if (ids.empty()) ids = criterion_ids();
      bool all = true;
      for (int id : ids) {
        const auto r = run_criterion(id);
        std::cout << format_result(r) << std::endl;
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
