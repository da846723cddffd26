#pragma once

// Primal equilibrium, value function and ergodic constant from a dual point.

#include "fbmfg/dual.hpp"

namespace fbmfg {

struct PrimalPoint {
  GridFunction m;
  VectorField w;
};

struct HjbSolution {
  GridFunction u;  // zero mean
  double lambda = 0.0;
};

/// m = (F*)'(theta + l*(|P_C v|)), w = m zeta_C(v), with C = C2 of the
/// placement.
PrimalPoint recover_primal(const DualPoint& x, const DualProblem& problem);
PrimalPoint recover_primal(const Vector& stacked, const DualProblem& problem);

/// Per node r = f(m) - (|w| / m)^2 / 2, lambda = mean(r), then
/// -nu Lap u = r - lambda on zero-mean functions. Requires nu > 0.
HjbSolution recover_hjb(const PrimalPoint& p, double nu, const Coupling& coupling);

/// Mean of r alone; the only part of (u, lambda) determined when nu = 0.
double ergodic_constant(const PrimalPoint& p, const Coupling& coupling);

/// sum_ij b(m, w) + F(m); +inf outside the domain.
double primal_objective(const PrimalPoint& p, const Coupling& coupling);

/// Max-norm residual of the discrete HJB equation
///   -nu Lap u + l*(|P_K(-D_h u)|) + lambda - f(m).
double hjb_residual(const PrimalPoint& p, const HjbSolution& s, double nu,
                    const Coupling& coupling);

}  // namespace fbmfg
