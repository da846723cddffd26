#include "fbmfg/experiment.hpp"

#include "fbmfg/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace fbmfg {

namespace {

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return key;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ContractError("config: '" + key + "' expects a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ContractError("config: '" + key + "' expects an integer, got '" + value + "'");
  }
}

bool explicit_solution_known(const ExperimentConfig& cfg) {
  return cfg.problem == ProblemKind::GomesLog && cfg.nu == 0.0;
}

bool is_dfb(Algorithm a) { return a == Algorithm::DFB0 || a == Algorithm::DFB1; }

Coupling make_coupling(const ExperimentConfig& cfg) {
  if (cfg.problem == ProblemKind::GomesLog) return Coupling::log_gomes(cfg.n);
  return Coupling::power_entropy(cfg.n, cfg.alpha, cfg.epsilon);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string to_string(ProblemKind p) {
  return p == ProblemKind::GomesLog ? "gomes-log" : "power-entropy";
}

std::string to_string(TolKind t) {
  return t == TolKind::ExactError ? "exact_error" : "relative_successive";
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string value = trim(raw_value);
  std::string lower = value;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  std::replace(lower.begin(), lower.end(), '_', '-');

  if (key == "problem") {
    if (lower == "gomeslog" || lower == "gomes-log" || lower == "log")
      problem = ProblemKind::GomesLog;
    else if (lower == "powerentropy" || lower == "power-entropy" || lower == "power")
      problem = ProblemKind::PowerEntropy;
    else
      throw ContractError("config: unknown problem '" + value +
                          "' (expected gomes-log or power-entropy)");
  } else if (key == "algorithm") {
    algorithm = parse_algorithm(value);
  } else if (key == "n") {
    n = static_cast<int>(parse_int(key, value));
  } else if (key == "nu") {
    nu = parse_double(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_double(key, value);
  } else if (key == "alpha") {
    alpha = parse_double(key, value);
  } else if (key == "gamma") {
    if (lower == "auto") {
      gamma_auto = true;
      gamma.reset();
    } else {
      gamma = parse_double(key, value);
      gamma_auto = false;
    }
  } else if (key == "gamma-auto") {
    gamma_auto = lower != "false" && lower != "0";
    if (gamma_auto) gamma.reset();
  } else if (key == "tol") {
    tol = parse_double(key, value);
  } else if (key == "tol-kind") {
    if (lower == "exact-error" || lower == "exact")
      tol_kind = TolKind::ExactError;
    else if (lower == "relative-successive" || lower == "relative")
      tol_kind = TolKind::RelativeSuccessive;
    else
      throw ContractError("config: unknown tol-kind '" + value +
                          "' (expected exact_error or relative_successive)");
  } else if (key == "max-iter") {
    max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "init-radius") {
    init_radius = parse_double(key, value);
  } else if (key == "output-dir") {
    output_dir = value;
  } else {
    throw ContractError("config: unknown key '" + raw_key + "'");
  }
}

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  if (n < 2) out.push_back("n must be at least 2");
  if (!(nu >= 0.0)) out.push_back("nu must be nonnegative");
  if (problem == ProblemKind::PowerEntropy) {
    if (!(alpha > 1.0 && alpha <= 2.0)) out.push_back("alpha must lie in (1, 2]");
    if (!(epsilon >= 0.0)) out.push_back("epsilon must be nonnegative");
  }
  if (gamma_auto && gamma) out.push_back("give either gamma or gamma-auto, not both");
  if (!gamma_auto && !gamma) out.push_back("gamma is required (or gamma-auto)");
  if (gamma && !(*gamma > 0.0)) out.push_back("gamma must be positive");
  if (gamma_auto) {
    if (!explicit_solution_known(*this))
      out.push_back("gamma-auto needs the explicit solution (problem gomes-log with nu = 0)");
    if (!init_radius) out.push_back("gamma-auto needs init-radius (the radius M0)");
    if (!is_dfb(algorithm)) out.push_back("gamma-auto applies to DFB0 and DFB1 only");
  }
  if (!(tol > 0.0)) out.push_back("tol must be positive");
  if (tol_kind == TolKind::ExactError) {
    if (!explicit_solution_known(*this))
      out.push_back("tol-kind exact_error needs the explicit solution (gomes-log, nu = 0)");
    if (!is_dfb(algorithm)) out.push_back("tol-kind exact_error applies to DFB0 and DFB1 only");
  }
  if (max_iter <= 0) out.push_back("max-iter must be positive");
  if (init_radius) {
    if (!(*init_radius > 0.0)) out.push_back("init-radius must be positive");
    if (!explicit_solution_known(*this))
      out.push_back("init-radius perturbs the explicit solution (gomes-log, nu = 0)");
  }
  if (output_dir.empty()) out.push_back("output-dir must not be empty");
  return out;
}

void ExperimentConfig::validate() const {
  const auto errs = problems();
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ContractError(msg);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractError("config line " + std::to_string(lineno) + ": expected key = value");
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ContractError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

Vector random_init(const Vector& x_star, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ContractError("random_init: radius must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vector u(x_star.size());
  do {
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = gauss(rng);
  } while (u.norm() == 0.0);
  return x_star + radius * (u / u.norm());
}

DualPoint random_init(const DualPoint& x_star, double radius, std::uint64_t seed) {
  return DualPoint::from_stacked(random_init(x_star.stacked(), radius, seed), x_star.n());
}

void write_history(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "iteration,exact_error,relative_change,bound,elapsed_s\n";
  const auto opt = [&os](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const auto& r : rows) {
    os << r.iteration << ',';
    opt(r.exact_error);
    os << ',';
    opt(r.relative_change);
    os << ',';
    opt(r.bound);
    os << ',' << r.elapsed << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

void emit_history(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  if (rows.empty()) throw ContractError("emit_history: no rows");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_history: cannot open '" + path + "'");
  write_history(os, rows);
  if (!os) throw std::runtime_error("emit_history: write to '" + path + "' failed");
}

double resolve_gamma(const ExperimentConfig& cfg) {
  if (cfg.gamma) return *cfg.gamma;
  if (!cfg.gamma_auto || !cfg.init_radius)
    throw ContractError("resolve_gamma: no step size configured");
  const LocalConstants lc = local_constants_log(cfg.n, *cfg.init_radius);
  return optimal_step(lc.mu, lc.lip).gamma_star;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  cfg.validate();
  const Placement placement =
      cfg.algorithm == Algorithm::DFB0 ? Placement::DFB0 : Placement::DFB1;
  const DualProblem problem(make_coupling(cfg), placement, cfg.nu);
  auto projector = std::make_shared<const AffineProjector>(cfg.n, cfg.nu);

  ExperimentResult out;
  out.gamma = resolve_gamma(cfg);

  std::optional<Vector> x_star;
  if (explicit_solution_known(cfg)) x_star = explicit_solution_log(cfg.n).stacked();
  const Vector x0 = cfg.init_radius ? random_init(*x_star, *cfg.init_radius, cfg.seed)
                                    : Vector::Zero(problem.dim());

  long inner = 0;
  if (is_dfb(cfg.algorithm)) {
    SolverConfig sc;
    sc.gamma = out.gamma;
    sc.tol = cfg.tol;
    sc.max_iter = cfg.max_iter;
    sc.stopping = cfg.tol_kind == TolKind::ExactError ? StoppingKind::ExactError
                                                      : StoppingKind::SuccessiveRelative;
    sc.target = x_star;
    if (x_star && cfg.init_radius && placement == Placement::DFB0) {
      const LocalConstants lc = local_constants_log(cfg.n, *cfg.init_radius);
      if (out.gamma < 2.0 / lc.lip) out.rho = contraction_factor(lc.mu, lc.lip, out.gamma);
    }
    sc.rho = out.rho;
    DfbResult r = solve_dfb(problem, x0, sc, DykstraConfig{}, projector);
    out.report = std::move(r.report);
    inner = r.inner_iterations;
  } else {
    BaselineConfig bc;
    bc.algorithm = cfg.algorithm;
    bc.gamma = out.gamma;
    bc.tol = cfg.tol;
    bc.max_iter = cfg.max_iter;
    bc.z0 = x0;
    const auto t0 = std::chrono::steady_clock::now();
    auto observe = [&](int k, const Vector& x, double change) {
      HistoryEntry e;
      e.iteration = k;
      if (x_star) e.exact_error = (x - *x_star).norm();
      if (k > 0) e.relative_change = change;
      e.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.report.history.push_back(e);
    };
    BaselineResult r = cfg.algorithm == Algorithm::DR ? dr_solve(problem, bc, projector, observe)
                                                      : cp_solve(problem, bc, projector, observe);
    out.report.final_point = std::move(r.solution);
    out.report.iterations = r.record.iterations;
    out.report.elapsed = r.record.time_s;
    out.report.termination = r.record.converged ? Termination::Converged : Termination::MaxIter;
  }
  out.converged = out.report.termination == Termination::Converged;

  out.primal = recover_primal(out.report.final_point, problem);
  std::string hjb_error;
  try {
    if (cfg.nu > 0.0) {
      out.hjb = recover_hjb(out.primal, cfg.nu, problem.coupling);
      out.lambda = out.hjb->lambda;
    } else {
      out.lambda = ergodic_constant(out.primal, problem.coupling);
    }
  } catch (const DomainError& e) {
    hjb_error = e.what();
  }

  if (!write_files) return out;

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");

  emit_history(out.report.history, (dir / "history.csv").string());
  out.files.push_back((dir / "history.csv").string());

  const auto dump = [&](const std::string& name, const auto& field) {
    std::ostringstream os;
    write_grid(os, field);
    write_text(dir / name, os.str());
    out.files.push_back((dir / name).string());
  };
  dump("m.grid", out.primal.m);
  dump("w.grid", out.primal.w);
  if (out.hjb) dump("u.grid", out.hjb->u);

  const double h = 1.0 / cfg.n;
  nlohmann::ordered_json j;
  j["problem"] = to_string(cfg.problem);
  j["algorithm"] = to_string(cfg.algorithm);
  j["n"] = cfg.n;
  j["nu"] = cfg.nu;
  j["epsilon"] = cfg.epsilon;
  j["alpha"] = cfg.alpha;
  j["gamma"] = out.gamma;
  j["gamma_auto"] = cfg.gamma_auto;
  j["tol"] = cfg.tol;
  j["tol_kind"] = to_string(cfg.tol_kind);
  j["max_iter"] = cfg.max_iter;
  j["seed"] = cfg.seed;
  j["init_radius"] = cfg.init_radius ? nlohmann::ordered_json(*cfg.init_radius) : nullptr;
  j["rho"] = out.rho ? nlohmann::ordered_json(*out.rho) : nullptr;
  j["converged"] = out.converged;
  j["termination"] = out.converged ? "converged" : "max_iter";
  j["iterations"] = out.report.iterations;
  j["elapsed_s"] = out.report.elapsed;
  if (placement == Placement::DFB0 && is_dfb(cfg.algorithm)) j["projection_sweeps"] = inner;
  const auto& last = out.report.history.back();
  j["final_exact_error"] =
      last.exact_error ? nlohmann::ordered_json(*last.exact_error) : nullptr;
  j["final_relative_change"] =
      last.relative_change ? nlohmann::ordered_json(*last.relative_change) : nullptr;
  j["mass"] = h * h * out.primal.m.sum();
  j["min_m"] = out.primal.m.data.minCoeff();
  j["lambda"] = out.lambda ? nlohmann::ordered_json(*out.lambda) : nullptr;
  if (!hjb_error.empty()) j["hjb_error"] = hjb_error;
  j["files"] = out.files;
  write_text(dir / "summary.json", j.dump(2) + "\n");
  out.files.push_back((dir / "summary.json").string());
  return out;
}

}  // namespace fbmfg
