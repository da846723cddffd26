#include "fbmfg/recovery.hpp"

#include "fbmfg/errors.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <limits>
#include <string>

namespace fbmfg {

namespace {

// (|w| / m)^2 / 2 with the closure 0 at m = w = 0.
double kinetic(double m, const Vec4& w, int node) {
  const double nw = w.norm();
  if (m > 0.0) {
    const double ratio = nw / m;
    return 0.5 * ratio * ratio;
  }
  if (nw == 0.0) return 0.0;
  throw DomainError("recovery: m = 0 with nonzero w at node " + std::to_string(node));
}

Vector residual_terms(const PrimalPoint& p, const Coupling& coupling) {
  const int s = p.m.nodes();
  Vector r(s);
  for (int k = 0; k < s; ++k) {
    const double m = p.m.data[k];
    if (m < 0.0) throw DomainError("recovery: negative density at node " + std::to_string(k));
    const double kin = kinetic(m, p.w.at(k), k);
    const double fm = coupling.f(k, m);
    if (!std::isfinite(fm))
      throw DomainError("recovery: f(m) undefined at node " + std::to_string(k));
    r[k] = fm - kin;
  }
  return r;
}

}  // namespace

PrimalPoint recover_primal(const DualPoint& x, const DualProblem& problem) {
  if (x.n() != problem.n) throw ContractError("recover_primal: grid size mismatch");
  const int s = problem.n * problem.n;
  const ConeTag c2 = cone_c2(problem.placement);
  PrimalPoint out{GridFunction(problem.n), VectorField(problem.n)};
  for (int k = 0; k < s; ++k) {
    const Vec4 v = x.v.at(k);
    const double m =
        problem.coupling.fstar_prime(k, x.theta.data[k] + ell_star_quad(project_cone(c2, v).norm()));
    out.m.data[k] = m;
    out.w.set(k, m * zeta_quad(c2, v));
  }
  return out;
}

PrimalPoint recover_primal(const Vector& stacked, const DualProblem& problem) {
  return recover_primal(DualPoint::from_stacked(stacked, problem.n), problem);
}

double ergodic_constant(const PrimalPoint& p, const Coupling& coupling) {
  return residual_terms(p, coupling).mean();
}

HjbSolution recover_hjb(const PrimalPoint& p, double nu, const Coupling& coupling) {
  if (!(nu > 0.0))
    throw DomainError("recover_hjb: the value function is only recovered for nu > 0");
  if (p.m.n != p.w.n || p.m.n != coupling.n())
    throw ContractError("recover_hjb: grid size mismatch");
  const int n = p.m.n;
  Vector r = residual_terms(p, coupling);
  HjbSolution out;
  out.lambda = r.mean();
  r.array() -= out.lambda;

  // -nu Lap is positive semidefinite with constant kernel; CG stays in the
  // zero-mean subspace for a zero-mean right-hand side.
  Eigen::SparseMatrix<double> op = -nu * Eigen::SparseMatrix<double>(assemble_laplacian(n));
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(20 * n * n);
  cg.compute(op);
  Vector u = cg.solve(r);
  if (cg.info() != Eigen::Success && cg.error() > 1e-10)
    throw NumericalError("recover_hjb: CG stalled at relative residual " +
                         std::to_string(cg.error()));
  u.array() -= u.mean();
  out.u = GridFunction(n, std::move(u));
  return out;
}

double primal_objective(const PrimalPoint& p, const Coupling& coupling) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int s = p.m.nodes();
  double total = 0.0;
  for (int k = 0; k < s; ++k) {
    const double m = p.m.data[k];
    const double nw = p.w.at(k).norm();
    if (m < 0.0) return inf;
    if (m == 0.0) {
      if (nw != 0.0) return inf;
      continue;  // b(0, 0) = 0 and F(0) = 0
    }
    total += 0.5 * nw * nw / m + coupling.value(k, m);
  }
  return total;
}

double hjb_residual(const PrimalPoint& p, const HjbSolution& s, double nu,
                    const Coupling& coupling) {
  const int n = s.u.n;
  const GridFunction lap = laplacian_h(s.u);
  const VectorField du = dh(s.u);
  double worst = 0.0;
  for (int k = 0; k < n * n; ++k) {
    const double ham = ell_star_quad(project_K(-du.at(k)).norm());
    const double res = -nu * lap.data[k] + ham + s.lambda - coupling.f(k, p.m.data[k]);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace fbmfg
