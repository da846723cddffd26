#pragma once

// Forward-backward splitting on the dual MFG problem. The nonsmooth term is
// psi(x) = sigma_{D_C1}(-x), whose prox is computed from the projection onto
// D_C1:
//   prox_{g psi}(z) = -prox_{g sigma_D}(-z) = z + g P_D(-z / g).

#include "fbmfg/dual.hpp"
#include "fbmfg/projection.hpp"

#include <memory>

namespace fbmfg {

SmoothOracle make_smooth_oracle(const DualProblem& problem);

/// prox_{gamma psi}. For the DFB0 placement the projection onto D_K runs
/// Dykstra, warm started through *state when one is given.
ProxOracle make_prox_oracle(const DualProblem& problem,
                            std::shared_ptr<const AffineProjector> projector,
                            const DykstraConfig& dykstra = {},
                            std::shared_ptr<DykstraState> state = nullptr);

/// P_{D_C1}, dispatched on the placement.
Vector project_feasible(const Vector& x, const DualProblem& problem, const AffineProjector& p,
                        const DykstraConfig& dykstra = {}, DykstraState* state = nullptr);

struct DfbResult {
  SolveReport report;
  long inner_iterations = 0;  // Dykstra sweeps, DFB0 only
};

DfbResult solve_dfb(const DualProblem& problem, const Vector& x0, const SolverConfig& cfg,
                    const DykstraConfig& dykstra = {},
                    std::shared_ptr<const AffineProjector> projector = nullptr);

}  // namespace fbmfg
