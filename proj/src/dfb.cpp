#include "fbmfg/dfb.hpp"

#include "fbmfg/errors.hpp"

namespace fbmfg {

SmoothOracle make_smooth_oracle(const DualProblem& problem) {
  auto shared = std::make_shared<const DualProblem>(problem);
  return SmoothOracle{[shared](const Vector& x) { return grad_phi(x, *shared); }, problem.dim()};
}

Vector project_feasible(const Vector& x, const DualProblem& problem, const AffineProjector& p,
                        const DykstraConfig& dykstra, DykstraState* state) {
  if (cone_c1(problem.placement) == ConeTag::FullSpace) return p.project(x);
  return project_DK(x, p, dykstra, state);
}

ProxOracle make_prox_oracle(const DualProblem& problem,
                            std::shared_ptr<const AffineProjector> projector,
                            const DykstraConfig& dykstra, std::shared_ptr<DykstraState> state) {
  if (!projector) throw ContractError("make_prox_oracle: projector is required");
  if (projector->n() != problem.n || projector->constraint().nu != problem.nu)
    throw ContractError("make_prox_oracle: projector built for a different problem");
  auto shared = std::make_shared<const DualProblem>(problem);
  return ProxOracle{[shared, projector, dykstra, state](double gamma, const Vector& z) {
    if (!(gamma > 0.0)) throw ContractError("prox: gamma must be positive");
    try {
      return Vector(z + gamma * project_feasible(-z / gamma, *shared, *projector, dykstra,
                                                 state.get()));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("prox of support function: ") + e.what());
    }
  }};
}

DfbResult solve_dfb(const DualProblem& problem, const Vector& x0, const SolverConfig& cfg,
                    const DykstraConfig& dykstra,
                    std::shared_ptr<const AffineProjector> projector) {
  if (!projector) projector = std::make_shared<const AffineProjector>(problem.n, problem.nu);
  auto state = std::make_shared<DykstraState>();
  const SmoothOracle smooth = make_smooth_oracle(problem);
  const ProxOracle prox = make_prox_oracle(problem, projector, dykstra, state);
  DfbResult out;
  out.report = fbs_solve(x0, smooth, prox, cfg);
  out.inner_iterations = state->total_inner;
  return out;
}

}  // namespace fbmfg
