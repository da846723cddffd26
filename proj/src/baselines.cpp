#include "fbmfg/baselines.hpp"

#include "fbmfg/errors.hpp"
#include "fbmfg/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace fbmfg {

std::pair<double, Vec4> prox_phi_pointwise(double theta, const Vec4& vbar, double gamma,
                                           const Coupling& coupling, int node, ConeTag c2,
                                           double inner_tol) {
  if (!(gamma > 0.0)) throw ContractError("prox_phi_pointwise: gamma must be positive");
  const Vec4 pc = project_cone(c2, vbar);
  const Vec4 polar = vbar - pc;
  const double r2 = pc.squaredNorm();

  const auto arg = [&](double s) {
    const double q = 1.0 + gamma * s;
    return theta - gamma * s + 0.5 * r2 / (q * q);
  };
  const auto residual = [&](double s) { return s - coupling.fstar_prime(node, arg(s)); };

  // residual is increasing; residual(0) <= 0 <= residual(hi).
  double lo = 0.0;
  double hi = coupling.fstar_prime(node, theta + 0.5 * r2);
  double s = hi;
  if (hi > 0.0) {
    double g = residual(s);
    bool done = false;
    for (int it = 0; it < 200; ++it) {
      const double scale = std::max(1.0, s);
      if (std::abs(g) <= inner_tol * scale || hi - lo <= inner_tol * scale) {
        done = true;
        break;
      }
      if (g > 0.0)
        hi = s;
      else
        lo = s;
      const double q = 1.0 + gamma * s;
      const double slope =
          1.0 + coupling.fstar_second(node, arg(s)) * gamma * (1.0 + r2 / (q * q * q));
      double next = s - g / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      s = next;
      g = residual(s);
    }
    if (!done)
      throw NumericalError("prox_phi_pointwise: Newton did not converge at node " +
                           std::to_string(node));
  }
  const double t = theta - gamma * s;
  return {t, polar + pc / (1.0 + gamma * s)};
}

Vector prox_phi(const Vector& x, double gamma, const DualProblem& problem, double inner_tol) {
  const int s = problem.n * problem.n;
  if (x.size() != 5 * s) throw ContractError("prox_phi: point has the wrong dimension");
  const ConeTag c2 = cone_c2(problem.placement);
  Vector out(x.size());
  parallel_for(0, s, [&](int k) {
    const Vec4 v(x[s + k], x[2 * s + k], x[3 * s + k], x[4 * s + k]);
    const auto [t, w] = prox_phi_pointwise(x[k], v, gamma, problem.coupling, k, c2, inner_tol);
    out[k] = t;
    for (int d = 0; d < 4; ++d) out[(d + 1) * s + k] = w[d];
  });
  return out;
}

Vector prox_psi(const Vector& x, double gamma, const DualProblem& problem,
                const AffineProjector& p, const DykstraConfig& dykstra, DykstraState* state) {
  if (!(gamma > 0.0)) throw ContractError("prox_psi: gamma must be positive");
  return x + gamma * project_feasible(-x / gamma, problem, p, dykstra, state);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DFB0: return "DFB0";
    case Algorithm::DFB1: return "DFB1";
    case Algorithm::CP: return "CP";
    case Algorithm::DR: return "DR";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "DFB0") return Algorithm::DFB0;
  if (u == "DFB1") return Algorithm::DFB1;
  if (u == "CP") return Algorithm::CP;
  if (u == "DR") return Algorithm::DR;
  throw ContractError("unknown algorithm '" + s + "' (expected DFB0, DFB1, CP or DR)");
}

void BaselineConfig::validate(Eigen::Index dim) const {
  if (algorithm != Algorithm::DR && algorithm != Algorithm::CP)
    throw ContractError("baseline config: algorithm must be DR or CP");
  if (!(gamma > 0.0)) throw ContractError("baseline config: gamma must be positive");
  if (!(tol > 0.0)) throw ContractError("baseline config: tol must be positive");
  if (max_iter <= 0) throw ContractError("baseline config: max_iter must be positive");
  if (!(inner_tol > 0.0)) throw ContractError("baseline config: inner_tol must be positive");
  if (z0 && z0->size() != dim) throw ContractError("baseline config: start has the wrong size");
}

namespace {

using Clock = std::chrono::steady_clock;

struct ProxPair {
  std::function<Vector(const Vector&)> f;  // prox_{gamma f}
  std::function<Vector(const Vector&)> g;  // prox_{gamma g}
};

ProxPair make_pair(const DualProblem& problem, const BaselineConfig& cfg,
                   const AffineProjector& p) {
  const double gamma = cfg.gamma;
  const double itol = cfg.inner_tol;
  auto phi = [&problem, gamma, itol](const Vector& x) { return prox_phi(x, gamma, problem, itol); };
  auto psi = [&problem, &p, gamma](const Vector& x) { return prox_psi(x, gamma, problem, p); };
  if (cfg.first == FirstProx::Phi) return {phi, psi};
  return {psi, phi};
}

RunRecord base_record(const DualProblem& problem, const BaselineConfig& cfg) {
  RunRecord r;
  r.algorithm = to_string(cfg.algorithm);
  r.gamma = cfg.gamma;
  r.nu = problem.nu;
  r.epsilon = problem.coupling.epsilon;
  r.alpha = problem.coupling.alpha;
  r.n = problem.n;
  return r;
}

std::shared_ptr<const AffineProjector> ensure_projector(
    const DualProblem& problem, std::shared_ptr<const AffineProjector> projector) {
  if (!projector) return std::make_shared<const AffineProjector>(problem.n, problem.nu);
  if (projector->n() != problem.n || projector->constraint().nu != problem.nu)
    throw ContractError("baseline: projector built for a different problem");
  return projector;
}

void check_finite(const Vector& x, int k) {
  if (!x.allFinite()) throw DivergedError("non-finite iterate", k);
}

}  // namespace

BaselineResult dr_solve(const DualProblem& problem, const BaselineConfig& cfg_in,
                        std::shared_ptr<const AffineProjector> projector,
                        const IterateObserver& observer) {
  BaselineConfig cfg = cfg_in;
  cfg.algorithm = Algorithm::DR;
  cfg.validate(problem.dim());
  projector = ensure_projector(problem, std::move(projector));
  const ProxPair prox = make_pair(problem, cfg, *projector);

  BaselineResult out;
  out.record = base_record(problem, cfg);
  const auto t0 = Clock::now();
  Vector z = cfg.z0 ? *cfg.z0 : Vector::Zero(problem.dim());
  Vector x = prox.f(z);
  if (observer) observer(0, x, std::numeric_limits<double>::infinity());
  StallGuard stalled(cfg.stall_window);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    z += prox.g(2.0 * x - z) - x;
    Vector next = prox.f(z);
    check_finite(next, k);
    const double change = relative_change(next, x);
    x = std::move(next);
    if (observer) observer(k, x, change);
    out.record.iterations = k;
    out.record.final_residual = change;
    if (change <= cfg.tol) {
      out.record.converged = true;
      break;
    }
    if (stalled(change)) break;
  }
  out.record.time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  out.solution = std::move(x);
  return out;
}

BaselineResult cp_solve(const DualProblem& problem, const BaselineConfig& cfg_in,
                        std::shared_ptr<const AffineProjector> projector,
                        const IterateObserver& observer) {
  BaselineConfig cfg = cfg_in;
  cfg.algorithm = Algorithm::CP;
  cfg.validate(problem.dim());
  projector = ensure_projector(problem, std::move(projector));
  const ProxPair prox = make_pair(problem, cfg, *projector);
  const double gamma = cfg.gamma;
  const double sigma = 1.0 / gamma;

  BaselineResult out;
  out.record = base_record(problem, cfg);
  const auto t0 = Clock::now();
  const Vector z0 = cfg.z0 ? *cfg.z0 : Vector::Zero(problem.dim());
  Vector x = prox.f(z0);
  Vector xbar = x;
  Vector y = (x - z0) / gamma;
  if (observer) observer(0, x, std::numeric_limits<double>::infinity());
  StallGuard stalled(cfg.stall_window);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    // prox_{sigma g*}(p) = p - sigma prox_{g / sigma}(p / sigma), and g / sigma = gamma g.
    const Vector p = y + sigma * xbar;
    y = p - sigma * prox.g(p / sigma);
    Vector next = prox.f(x - gamma * y);
    check_finite(next, k);
    const double change = relative_change(next, x);
    xbar = 2.0 * next - x;
    x = std::move(next);
    if (observer) observer(k, x, change);
    out.record.iterations = k;
    out.record.final_residual = change;
    if (change <= cfg.tol) {
      out.record.converged = true;
      break;
    }
    if (stalled(change)) break;
  }
  out.record.time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  out.solution = std::move(x);
  return out;
}

RunRecord single_run(const HarnessProblem& hp, Algorithm algorithm, double gamma, double tol,
                     int max_iter, const DykstraConfig& dykstra,
                     std::shared_ptr<const AffineProjector> projector, Vector* solution,
                     FirstProx first, int stall_window) {
  const int n = hp.coupling.n();
  const Placement placement = algorithm == Algorithm::DFB0 ? Placement::DFB0 : Placement::DFB1;
  const DualProblem problem(hp.coupling, placement, hp.nu);
  projector = ensure_projector(problem, std::move(projector));

  if (algorithm == Algorithm::DR || algorithm == Algorithm::CP) {
    BaselineConfig cfg;
    cfg.algorithm = algorithm;
    cfg.gamma = gamma;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.first = first;
    cfg.stall_window = stall_window;
    BaselineResult r = algorithm == Algorithm::DR ? dr_solve(problem, cfg, projector)
                                                  : cp_solve(problem, cfg, projector);
    if (solution) *solution = std::move(r.solution);
    return r.record;
  }

  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.stopping = StoppingKind::SuccessiveRelative;
  cfg.stall_window = stall_window;
  const DfbResult r = solve_dfb(problem, Vector::Zero(problem.dim()), cfg, dykstra, projector);
  RunRecord rec;
  rec.algorithm = to_string(algorithm);
  rec.time_s = r.report.elapsed;
  rec.iterations = r.report.iterations;
  rec.gamma = gamma;
  rec.nu = hp.nu;
  rec.epsilon = hp.coupling.epsilon;
  rec.alpha = hp.coupling.alpha;
  rec.n = n;
  rec.converged = r.report.termination == Termination::Converged;
  const auto& last = r.report.history.back();
  rec.final_residual = last.relative_change.value_or(0.0);
  if (solution) *solution = r.report.final_point;
  return rec;
}

HarnessResult harness_run(const std::vector<HarnessProblem>& problems,
                          const std::vector<Algorithm>& algorithms,
                          const std::vector<std::vector<double>>& gammas,
                          const HarnessOptions& options) {
  if (problems.empty()) throw ContractError("harness_run: no problems");
  if (algorithms.empty()) throw ContractError("harness_run: no algorithms");
  if (gammas.size() != algorithms.size())
    throw ContractError("harness_run: one gamma sweep per algorithm is required");
  for (const auto& g : gammas)
    if (g.empty()) throw ContractError("harness_run: empty gamma sweep");

  HarnessResult out;
  for (const auto& hp : problems) {
    const int n = hp.coupling.n();
    const double h = 1.0 / n;
    const double tol = options.tol > 0.0 ? options.tol : h * h * h;
    auto projector = std::make_shared<const AffineProjector>(n, hp.nu);
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      std::optional<RunRecord> best;
      for (double gamma : gammas[a]) {
        RunRecord rec;
        try {
          rec = single_run(hp, algorithms[a], gamma, tol, options.max_iter, options.dykstra,
                           projector, nullptr, options.first, options.stall_window);
        } catch (const std::exception& e) {
          rec.algorithm = to_string(algorithms[a]);
          rec.gamma = gamma;
          rec.nu = hp.nu;
          rec.epsilon = hp.coupling.epsilon;
          rec.alpha = hp.coupling.alpha;
          rec.n = n;
          rec.error = e.what();
        }
        out.runs.push_back(rec);
        if (rec.converged && rec.error.empty() &&
            (!best || rec.iterations < best->iterations))
          best = rec;
      }
      if (!best) continue;
      std::vector<double> times{best->time_s};
      for (int rep = 1; rep < options.timing_repeats; ++rep) {
        try {
          times.push_back(single_run(hp, algorithms[a], best->gamma, tol, options.max_iter,
                                     options.dykstra, projector, nullptr, options.first,
                                     options.stall_window)
                              .time_s);
        } catch (const std::exception&) {
        }
      }
      std::sort(times.begin(), times.end());
      best->time_s = times[times.size() / 2];
      out.best.push_back(*best);
    }
  }
  return out;
}

void write_records_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
  const auto prec = os.precision();
  os.precision(10);
  os << "algorithm,time_s,iterations,gamma,nu,epsilon,alpha,n\n";
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.time_s << ',';
    if (r.error.empty() && r.converged)
      os << r.iterations;
    else
      os << "";
    os << ',' << r.gamma << ',' << r.nu << ',' << r.epsilon << ',' << r.alpha << ',' << r.n
       << '\n';
  }
  os.precision(prec);
}

}  // namespace fbmfg
