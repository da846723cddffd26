#include "fbmfg/acceptance.hpp"

#include "fbmfg/baselines.hpp"
#include "fbmfg/experiment.hpp"
#include "fbmfg/recovery.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace fbmfg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

bool within_band(int value, int target, double frac) {
  return std::abs(value - target) <= frac * target;
}

constexpr int kTableN = 60;
constexpr double kTableTol = 7e-5;
constexpr std::uint64_t kSeed = 1;

SolveReport explicit_run(Placement placement, double radius, double gamma, bool with_bound) {
  const int n = kTableN;
  const DualProblem problem(Coupling::log_gomes(n), placement, 0.0);
  const Vector xs = explicit_solution_log(n).stacked();
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.tol = kTableTol;
  cfg.max_iter = 5000;
  cfg.stopping = StoppingKind::ExactError;
  cfg.target = xs;
  if (with_bound) {
    const LocalConstants lc = local_constants_log(n, radius);
    cfg.rho = contraction_factor(lc.mu, lc.lip, gamma);
  }
  return solve_dfb(problem, random_init(xs, radius, kSeed), cfg).report;
}

// ---- 1
CriterionResult explicit_convergence() {
  CriterionResult r;
  std::ostringstream d;
  auto t0 = Clock::now();
  const SolveReport dfb1 = explicit_run(Placement::DFB1, 0.5, 0.2132, false);
  const double t1 = seconds_since(t0);
  t0 = Clock::now();
  const SolveReport dfb0 = explicit_run(Placement::DFB0, 0.5, 0.2132, false);
  const double t2 = seconds_since(t0);
  const bool ok1 = dfb1.termination == Termination::Converged &&
                   within_band(dfb1.iterations, 577, 0.3) && t1 < 60.0;
  const bool ok0 =
      dfb0.termination == Termination::Converged && within_band(dfb0.iterations, 357, 0.3);
  d << "DFB1 " << dfb1.iterations << " it (reference 577, band +-30%) in " << fmt(t1, 3)
    << " s; DFB0 " << dfb0.iterations << " it (reference 357) in " << fmt(t2, 3) << " s";
  r.passed = ok1 && ok0;
  r.detail = d.str();
  return r;
}

// ---- 2
CriterionResult auto_step() {
  CriterionResult r;
  std::ostringstream d;
  bool ok = true;
  const std::pair<double, double> cases[] = {{0.1, 0.3748}, {0.5, 0.2132}};
  for (const auto& [m0, reference] : cases) {
    const LocalConstants lc = local_constants_log(kTableN, m0);
    const double g = optimal_step(lc.mu, lc.lip).gamma_star;
    const bool match = std::round(g * 1e4) == std::round(reference * 1e4);
    ok = ok && match;
    d << "M0=" << m0 << ": 2/(L+mu)=" << fmt(g, 6) << " vs " << reference
      << " (L=" << fmt(lc.lip, 6) << ", mu=" << fmt(lc.mu, 6)
      << "; 1.99/L=" << fmt(near_critical_step(lc.lip), 6) << "); ";
  }
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// ---- 3
CriterionResult bound_domination() {
  CriterionResult r;
  std::ostringstream d;
  bool ok = true;
  const std::pair<double, double> cases[] = {{0.1, 0.3748}, {0.5, 0.2132}};
  for (const auto& [radius, gamma] : cases) {
    const SolveReport rep = explicit_run(Placement::DFB0, radius, gamma, true);
    double worst = -1e300, ratio = 0.0;
    for (const auto& h : rep.history) {
      worst = std::max(worst, *h.exact_error - *h.bound);
      if (h.iteration > 0) ratio = std::max(ratio, *h.exact_error / *h.bound);
    }
    ok = ok && worst <= 1e-10;
    d << "radius " << radius << ": " << rep.iterations
      << " it, max(error - bound) = " << fmt(worst, 3)
      << ", max error/bound after step 0 = " << fmt(ratio, 3) << "; ";
  }
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// ---- 4
CriterionResult fejer() {
  CriterionResult r;
  std::ostringstream d;
  bool ok = true;
  const std::pair<double, double> cases[] = {{0.1, 0.3748}, {0.5, 0.2132}};
  for (const auto& [radius, gamma] : cases) {
    const SolveReport rep = explicit_run(Placement::DFB1, radius, gamma, false);
    double worst = -1e300;
    for (std::size_t k = 1; k < rep.history.size(); ++k)
      worst = std::max(worst, *rep.history[k].exact_error - *rep.history[k - 1].exact_error);
    ok = ok && worst <= 1e-12;
    d << "radius " << radius << ": max increase " << fmt(worst, 3) << " over "
      << rep.iterations << " it; ";
  }
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// ---- 5
std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (int k = 0; lo + k * step <= hi + 1e-12; ++k) out.push_back(std::round((lo + k * step) * 1e4) / 1e4);
  return out;
}

CriterionResult comparison_shape() {
  CriterionResult r;
  std::ostringstream d;
  bool ok = true;
  const std::vector<Algorithm> algs{Algorithm::CP, Algorithm::DR, Algorithm::DFB0,
                                    Algorithm::DFB1};
  const std::vector<std::vector<double>> gammas{grid(0.5, 1.5, 0.05), grid(0.5, 1.5, 0.05),
                                                grid(0.4, 1.4, 0.05), grid(0.4, 1.4, 0.05)};
  const auto t0 = Clock::now();
  for (const auto& row : comparison_table_rows()) {
    HarnessProblem hp{Coupling::power_entropy(kTableN, 1.5, row.epsilon), row.nu};
    const HarnessResult res = harness_run({hp}, algs, gammas);
    std::map<std::string, RunRecord> best;
    for (const auto& b : res.best) best[b.algorithm] = b;
    const std::map<std::string, int> reference{
        {"CP", row.cp}, {"DR", row.dr}, {"DFB0", row.dfb0}, {"DFB1", row.dfb1}};
    bool row_ok = best.size() == 4;
    d << "nu=" << row.nu << " eps=" << row.epsilon << ":";
    for (const auto& [name, target] : reference) {
      if (!best.count(name)) {
        d << " " << name << " none;";
        continue;
      }
      const auto& b = best[name];
      const bool band = within_band(b.iterations, target, 0.5);
      row_ok = row_ok && band;
      d << " " << name << " " << b.iterations << "/" << target << " (g=" << b.gamma
        << ", " << fmt(b.time_s, 3) << "s)" << (band ? "" : "!") << ";";
    }
    // CP and DR must agree run by run.
    std::map<double, int> cp_it, dr_it;
    for (const auto& run : res.runs) {
      if (run.algorithm == "CP") cp_it[run.gamma] = run.converged ? run.iterations : -1;
      if (run.algorithm == "DR") dr_it[run.gamma] = run.converged ? run.iterations : -1;
    }
    const bool same = cp_it == dr_it;
    row_ok = row_ok && same;
    if (!same) d << " CP/DR differ!";
    if (best.size() == 4) {
      const double ratio =
          std::min(best["CP"].time_s, best["DR"].time_s) / best["DFB1"].time_s;
      const bool fast = ratio >= 3.0;
      row_ok = row_ok && fast;
      d << " speedup " << fmt(ratio, 3) << (fast ? "" : "!");
    }
    d << " | ";
    ok = ok && row_ok;
  }
  d << "total " << fmt(seconds_since(t0), 3) << " s";
  r.passed = ok && seconds_since(t0) < 900.0;
  r.detail = d.str();
  return r;
}

// ---- 6
// F*(rho) = sup_y rho y - F(y), by bisection on F'(y) = rho.
double fstar_value_oracle(const Coupling& c, int node, double rho) {
  const double cij = c.c.data[node];
  if (c.kind == CouplingKind::LogGomes) return std::exp(rho + cij);
  const double a = c.alpha, e = c.epsilon;
  const auto fprime = [&](double y) {
    return std::pow(y, a - 1.0) + cij + (e > 0.0 ? e * std::log(y) : 0.0);
  };
  const auto F = [&](double y) {
    if (y == 0.0) return 0.0;
    return std::pow(y, a) / a + cij * y + (e > 0.0 ? e * y * (std::log(y) - 1.0) : 0.0);
  };
  if (e == 0.0 && rho <= cij) return 0.0;
  double lo = 1.0, hi = 1.0;
  while (fprime(lo) >= rho && lo > 1e-300) lo *= 0.5;
  while (fprime(hi) <= rho) hi *= 2.0;
  if (e == 0.0) lo = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (fprime(mid) < rho ? lo : hi) = mid;
  }
  const double y = 0.5 * (lo + hi);
  return rho * y - F(y);
}

double node_phi(const Coupling& c, ConeTag c2, int node, double theta, const Vec4& v) {
  return fstar_value_oracle(c, node, theta + ell_star_quad(project_cone(c2, v).norm()));
}

CriterionResult gradient_check() {
  CriterionResult r;
  std::ostringstream d;
  const int n = 4;
  const int s = n * n;
  const double step = 1e-6;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss;
  const std::vector<std::pair<std::string, Coupling>> couplings{
      {"log", Coupling::log_gomes(n)},
      {"power eps=0.1", Coupling::power_entropy(n, 1.5, 0.1)},
      {"power eps=0", Coupling::power_entropy(n, 1.5, 0.0)}};
  bool ok = true;
  for (const auto& [name, c] : couplings) {
    for (Placement pl : {Placement::DFB0, Placement::DFB1}) {
      const DualProblem problem(c, pl, 0.0);
      const ConeTag c2 = cone_c2(pl);
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        Vector x(5 * s);
        for (int k = 0; k < s; ++k) x[k] = unif(rng);
        for (int k = s; k < 5 * s; ++k) x[k] = gauss(rng);
        const Vector g = grad_phi(x, problem);
        for (int k = 0; k < s; ++k) {
          for (int comp = 0; comp < 5; ++comp) {
            double theta = x[k];
            Vec4 v(x[s + k], x[2 * s + k], x[3 * s + k], x[4 * s + k]);
            const auto eval = [&](double delta) {
              double t = theta;
              Vec4 w = v;
              if (comp == 0)
                t += delta;
              else
                w[comp - 1] += delta;
              return node_phi(c, c2, k, t, w);
            };
            const double fd = (eval(step) - eval(-step)) / (2.0 * step);
            const double an = g[comp * s + k];
            worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
          }
        }
      }
      const bool pass = worst <= 1e-5;
      ok = ok && pass;
      d << name << (pl == Placement::DFB0 ? "/DFB0" : "/DFB1") << " max rel err "
        << fmt(worst, 3) << "; ";
    }
  }
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// ---- 7
// Projection onto {A y = b, y_i = 0 for i in S} restricted to sign patterns,
// by enumeration of the active sets of the cone constraints (N = 2).
Vector qp_oracle(const Vector& x, const ConstraintOperator& op) {
  const int n = op.n;
  const int s = n * n;
  const int m = 4 * s;  // constrained coordinates
  const Eigen::MatrixXd A = Eigen::MatrixXd(op.A);
  const auto sign_ok = [&](const Vector& y) {
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < s; ++j) {
        const double val = y[(k + 1) * s + j];
        if ((k % 2 == 0 && val < -1e-12) || (k % 2 == 1 && val > 1e-12)) return false;
      }
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  Vector best_y;
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<int> free_idx;
    for (int i = 0; i < 5 * s; ++i) {
      if (i >= s && (mask >> (i - s)) & 1L) continue;
      free_idx.push_back(i);
    }
    const int f = static_cast<int>(free_idx.size());
    Eigen::MatrixXd Af(A.rows(), f);
    Vector xf(f);
    for (int c = 0; c < f; ++c) {
      Af.col(c) = A.col(free_idx[c]);
      xf[c] = x[free_idx[c]];
    }
    const Vector rhs = Af * xf - op.b;
    const Eigen::MatrixXd AAt = Af * Af.transpose();
    const Vector lambda = AAt.completeOrthogonalDecomposition().solve(rhs);
    const Vector yf = xf - Af.transpose() * lambda;
    if ((Af * yf - op.b).norm() > 1e-9) continue;
    Vector y = Vector::Zero(5 * s);
    for (int c = 0; c < f; ++c) y[free_idx[c]] = yf[c];
    if (!sign_ok(y)) continue;
    const double dist = (y - x).norm();
    if (dist < best) {
      best = dist;
      best_y = y;
    }
  }
  return best_y;
}

CriterionResult projection_check() {
  CriterionResult r;
  std::ostringstream d;
  bool ok = true;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  const auto random_vec = [&](Eigen::Index size, double scale) {
    Vector v(size);
    for (auto& e : v) e = scale * gauss(rng);
    return v;
  };

  // Affine residual.
  for (double nu : {0.0, 0.5}) {
    const AffineProjector p(kTableN, nu);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
      worst = std::max(worst, p.residual(p.project(random_vec(p.dim(), 1.0))) /
                                  (1.0 + p.constraint().b.norm()));
    ok = ok && worst <= 1e-10;
    d << "affine residual nu=" << nu << " " << fmt(worst, 3) << "; ";
  }

  // D_K against the enumeration oracle.
  for (double nu : {0.0, 0.5}) {
    const AffineProjector p(2, nu);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const Vector x = random_vec(p.dim(), 1.0);
      const Vector ref = qp_oracle(x, p.constraint());
      worst = std::max(worst, (project_DK(x, p, DykstraConfig{}) - ref).lpNorm<Eigen::Infinity>());
    }
    ok = ok && worst <= 1e-6;
    d << "D_K vs QP oracle nu=" << nu << " " << fmt(worst, 3) << "; ";
  }

  // Idempotence and nonexpansiveness over 1000 pairs.
  {
    const AffineProjector p(8, 0.5);
    double idem = 0.0, expand = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_vec(p.dim(), 1.0), y = random_vec(p.dim(), 1.0);
      const Vector px = p.project(x), py = p.project(y);
      idem = std::max(idem, (p.project(px) - px).norm());
      expand = std::max(expand, (px - py).norm() - (x - y).norm());
    }
    const bool pass = idem <= 1e-10 && expand <= 1e-10;
    ok = ok && pass;
    d << "affine idempotence " << fmt(idem, 3) << ", expansion " << fmt(expand, 3) << "; ";
  }
  {
    const AffineProjector p(4, 0.5);
    const DykstraConfig cfg;
    double idem = 0.0, expand = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_vec(p.dim(), 1.0), y = random_vec(p.dim(), 1.0);
      const Vector px = project_DK(x, p, cfg), py = project_DK(y, p, cfg);
      idem = std::max(idem, (project_DK(px, p, cfg) - px).norm());
      expand = std::max(expand, (px - py).norm() - (x - y).norm());
    }
    const bool pass = idem <= 1e-8 && expand <= 1e-8;
    ok = ok && pass;
    d << "D_K idempotence " << fmt(idem, 3) << ", expansion " << fmt(expand, 3);
  }
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// ---- 8
CriterionResult moreau_identity() {
  CriterionResult r;
  std::ostringstream d;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  const AffineProjector p(20, 0.5);
  const auto proj = [&p](const Vector& v) { return p.project(v); };
  const Vector origin = p.project(Vector::Zero(p.dim()));
  double identity = 0.0, dual_feas = 0.0, range = 0.0;
  for (double gamma : {0.1, 1.0, 10.0}) {
    for (int t = 0; t < 100; ++t) {
      Vector x(p.dim());
      for (auto& e : x) e = gauss(rng);
      const Vector out = prox_support_from_projection(gamma, proj, x);
      const Vector direct = x - gamma * p.project(x / gamma);
      identity = std::max(identity, (out - direct).norm() / (1.0 + x.norm()));
      // (x - out) / gamma lies in D and out is normal to D there, i.e.
      // out is orthogonal to null(A).
      const Vector dpt = (x - out) / gamma;
      dual_feas = std::max(dual_feas, p.residual(dpt) / (1.0 + p.constraint().b.norm()));
      range = std::max(range, (p.project(out) - origin).norm() / (1.0 + out.norm()));
    }
  }
  r.passed = identity <= 1e-12 && dual_feas <= 1e-10 && range <= 1e-10;
  r.detail = "identity " + fmt(identity, 3) + ", (x - p)/gamma residual " + fmt(dual_feas, 3) +
             ", null-space component of p " + fmt(range, 3);
  return r;
}

// ---- 9
CriterionResult lambert() {
  CriterionResult r;
  double worst = 0.0;
  for (int k = 0; k <= 7300; ++k) {
    const double y = -30.0 + 0.1 * k;
    const double w = lambert_w0_of_log(y);
    const double arg = std::exp(y);
    // |w e^w - e^y| = e^y |expm1(w + ln w - y)|
    const double res = arg * std::abs(std::expm1(w + std::log(w) - y));
    worst = std::max(worst, res / std::max(1.0, arg));
  }
  const double at_e = lambert_w0_of_log(1.0);
  r.passed = worst <= 1e-12 && std::abs(at_e - 1.0) <= 1e-14;
  r.detail = "max scaled residual " + fmt(worst, 3) + " on y in [-30, 700]; W0(e) - 1 = " +
             fmt(at_e - 1.0, 3);
  return r;
}

// ---- 10
CriterionResult pipeline() {
  CriterionResult r;
  const int n = kTableN;
  const double nu = 0.5;
  const DualProblem problem(Coupling::power_entropy(n, 1.5, 0.1), Placement::DFB1, nu);
  SolverConfig cfg;
  cfg.gamma = 0.65;
  cfg.tol = 1e-13;
  cfg.max_iter = 2000;
  const DfbResult res = solve_dfb(problem, Vector::Zero(problem.dim()), cfg);
  const PrimalPoint pp = recover_primal(res.report.final_point, problem);
  const HjbSolution hjb = recover_hjb(pp, nu, problem.coupling);
  const double resid = hjb_residual(pp, hjb, nu, problem.coupling);
  const double h = 1.0 / n;
  const double mass = h * h * pp.m.sum();
  const double min_m = pp.m.data.minCoeff();
  const double usum = std::abs(hjb.u.sum());
  r.passed = res.report.termination == Termination::Converged && resid <= 1e-6 && min_m > 0.0 &&
             std::abs(mass - 1.0) <= 1e-6 && usum <= 1e-10;
  r.detail = std::to_string(res.report.iterations) + " it; HJB residual " + fmt(resid, 3) +
             ", min m " + fmt(min_m, 4) + ", mass - 1 = " + fmt(mass - 1.0, 3) + ", |sum u| " +
             fmt(usum, 3) + ", lambda " + fmt(hjb.lambda, 8);
  return r;
}

// ---- 11
CriterionResult agreement() {
  CriterionResult r;
  const int n = 20;
  const HarnessProblem hp{Coupling::power_entropy(n, 1.5, 0.1), 0.5};
  const double tol = 1e-12;
  Vector x_dfb1, x_dr, x_cp;
  const RunRecord a = single_run(hp, Algorithm::DFB1, 0.65, tol, 5000, {}, nullptr, &x_dfb1);
  const RunRecord b = single_run(hp, Algorithm::DR, 0.95, tol, 5000, {}, nullptr, &x_dr);
  const RunRecord c = single_run(hp, Algorithm::CP, 0.95, tol, 5000, {}, nullptr, &x_cp);
  const DualProblem problem(hp.coupling, Placement::DFB1, hp.nu);
  const Vector m1 = recover_primal(x_dfb1, problem).m.data;
  const Vector m2 = recover_primal(x_dr, problem).m.data;
  const Vector m3 = recover_primal(x_cp, problem).m.data;
  const double d12 = (m1 - m2).lpNorm<Eigen::Infinity>();
  const double d13 = (m1 - m3).lpNorm<Eigen::Infinity>();
  const double d23 = (m2 - m3).lpNorm<Eigen::Infinity>();
  r.passed = a.converged && b.converged && c.converged && std::max({d12, d13, d23}) <= 1e-4;
  r.detail = "iterations DFB1/DR/CP " + std::to_string(a.iterations) + "/" +
             std::to_string(b.iterations) + "/" + std::to_string(c.iterations) +
             "; max |m diff| DFB1-DR " + fmt(d12, 3) + ", DFB1-CP " + fmt(d13, 3) +
             ", DR-CP " + fmt(d23, 3);
  return r;
}

struct Entry {
  const char* name;
  CriterionResult (*run)();
};

const std::map<int, Entry>& registry() {
  static const std::map<int, Entry> table{
      {1, {"explicit-solution convergence", explicit_convergence}},
      {2, {"automatic step against the reference steps", auto_step}},
      {3, {"a priori bound domination for DFB0", bound_domination}},
      {4, {"Fejer monotonicity of DFB1 errors", fejer}},
      {5, {"comparison sweep shape (iterations, CP=DR, DFB1 speedup)", comparison_shape}},
      {6, {"gradient against finite differences", gradient_check}},
      {7, {"projection correctness", projection_check}},
      {8, {"Moreau identity for the support function prox", moreau_identity}},
      {9, {"Lambert W residuals", lambert}},
      {10, {"pipeline self-consistency (nu > 0)", pipeline}},
      {11, {"cross-algorithm agreement of m", agreement}},
  };
  return table;
}

}  // namespace

const std::vector<TableRow>& comparison_table_rows() {
  static const std::vector<TableRow> rows{
      {0.1, 0.0, 26, 26, 23, 30}, {0.5, 0.0, 16, 16, 12, 10},
      {0.1, 0.1, 26, 26, 22, 27}, {0.5, 0.1, 17, 17, 10, 10},
      {0.1, 0.5, 25, 25, 17, 20}, {0.5, 0.5, 20, 20, 8, 8},
  };
  return rows;
}

std::vector<int> criterion_ids() {
  std::vector<int> out;
  for (const auto& [id, e] : registry()) out.push_back(id);
  return out;
}

std::string criterion_name(int id) {
  const auto it = registry().find(id);
  if (it == registry().end()) throw std::out_of_range("unknown criterion " + std::to_string(id));
  return it->second.name;
}

CriterionResult run_criterion(int id) {
  const auto it = registry().find(id);
  if (it == registry().end()) throw std::out_of_range("unknown criterion " + std::to_string(id));
  CriterionResult r;
  try {
    r = it->second.run();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.id = id;
  r.name = it->second.name;
  return r;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
         ": " + r.detail;
}

}  // namespace fbmfg
