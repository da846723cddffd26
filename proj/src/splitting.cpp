#include "fbmfg/splitting.hpp"

#include "fbmfg/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace fbmfg {

void SolverConfig::validate(Eigen::Index dim) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ContractError("solver config: gamma must be positive");
  if (!(tol > 0.0)) throw ContractError("solver config: tol must be positive");
  if (max_iter <= 0)
    throw ContractError("solver config: max_iter must be positive");
  if (stall_window < 0)
    throw ContractError("solver config: stall_window must be non-negative");
  if (stopping == StoppingKind::ExactError && !target)
    throw ContractError("solver config: exact-error stopping needs a target point");
  if (target && target->size() != dim)
    throw ContractError("solver config: target has the wrong dimension");
  if (rho && !(*rho > 0.0 && *rho < 1.0))
    throw ContractError("solver config: rho must lie in (0, 1)");
}

double relative_change(const Vector& next, const Vector& current) {
  const double diff = (next - current).norm();
  const double base = current.norm();
  if (base == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / base;
}

Vector fbs_iterate(const Vector& x, const SmoothOracle& smooth,
                   const ProxOracle& prox, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("fbs_iterate: gamma must be positive");
  if (x.size() != smooth.dim)
    throw ContractError("fbs_iterate: point has dimension " +
                        std::to_string(x.size()) + ", oracle expects " +
                        std::to_string(smooth.dim));
  const Vector g = smooth.grad(x);
  if (g.size() != x.size())
    throw ContractError("fbs_iterate: gradient dimension mismatch");
  Vector out = prox.prox(gamma, x - gamma * g);
  if (out.size() != x.size())
    throw ContractError("fbs_iterate: prox dimension mismatch");
  return out;
}

SolveReport fbs_solve(const Vector& x0, const SmoothOracle& smooth,
                      const ProxOracle& prox, const SolverConfig& cfg) {
  cfg.validate(smooth.dim);
  if (x0.size() != smooth.dim)
    throw ContractError("fbs_solve: starting point has the wrong dimension");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto seconds = [&] {
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  SolveReport report;
  report.history.reserve(static_cast<std::size_t>(std::min(cfg.max_iter, 100000)) + 1);

  std::optional<double> e0;
  if (cfg.target) e0 = (x0 - *cfg.target).norm();

  const auto record = [&](int n, const Vector& x, std::optional<double> rel) {
    HistoryEntry h;
    h.iteration = n;
    h.relative_change = rel;
    if (cfg.target) h.exact_error = (x - *cfg.target).norm();
    if (cfg.rho && e0) h.bound = theoretical_error_bound(*cfg.rho, n, *e0);
    h.elapsed = seconds();
    report.history.push_back(h);
    return h;
  };

  const auto stop = [&](const HistoryEntry& h) {
    if (cfg.stopping == StoppingKind::ExactError)
      return *h.exact_error <= cfg.tol;
    return h.relative_change && *h.relative_change <= cfg.tol;
  };

  Vector x = x0;
  report.termination = Termination::MaxIter;
  if (stop(record(0, x, std::nullopt))) {
    report.termination = Termination::Converged;
  } else {
    StallGuard stalled(cfg.stopping == StoppingKind::SuccessiveRelative ? cfg.stall_window : 0);
    for (int n = 1; n <= cfg.max_iter; ++n) {
      Vector next = fbs_iterate(x, smooth, prox, cfg.gamma);
      if (!next.allFinite())
        throw DivergedError("fbs_solve: non-finite iterate at iteration " +
                                std::to_string(n),
                            n);
      const double rel = relative_change(next, x);
      x = std::move(next);
      report.iterations = n;
      if (stop(record(n, x, rel))) {
        report.termination = Termination::Converged;
        break;
      }
      if (stalled(rel)) {
        report.termination = Termination::Stalled;
        break;
      }
    }
  }
  report.final_point = std::move(x);
  report.elapsed = seconds();
  return report;
}

double contraction_factor(double mu, double lip, double gamma) {
  if (!(mu > 0.0))
    throw DomainError("contraction_factor: mu must be positive");
  if (!(lip >= mu)) throw DomainError("contraction_factor: need mu <= lip");
  if (!(gamma > 0.0 && gamma < 2.0 / lip))
    throw DomainError("contraction_factor: gamma must lie in (0, 2/lip)");
  return std::max(std::abs(1.0 - gamma * mu), std::abs(1.0 - gamma * lip));
}

OptimalStep optimal_step(double mu, double lip) {
  if (!(mu > 0.0)) throw DomainError("optimal_step: mu must be positive");
  if (!(lip >= mu)) throw DomainError("optimal_step: need mu <= lip");
  return {2.0 / (lip + mu), (lip - mu) / (lip + mu)};
}

double theoretical_error_bound(double rho, int n, double e0) {
  if (!(rho > 0.0 && rho < 1.0))
    throw DomainError("theoretical_error_bound: rho must lie in (0, 1)");
  if (n < 0 || e0 < 0.0)
    throw DomainError("theoretical_error_bound: need n >= 0 and e0 >= 0");
  return std::pow(rho, n) * e0;
}

}  // namespace fbmfg
