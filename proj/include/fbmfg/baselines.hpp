#pragma once

// Douglas-Rachford and Chambolle-Pock on the same dual problem, with the
// splitting (psi, phi): psi = sigma_{D_C1}(-.) through its projection, phi
// through a per-node prox. Also the step-size sweep harness.

#include "fbmfg/dfb.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fbmfg {

/// Minimizer of F*(t + l*(|P_C w|)) + (|t - theta|^2 + |w - vbar|^2) / (2 gamma).
/// The polar part of vbar is kept and P_C vbar is shrunk by 1 / (1 + gamma s),
/// where s = m at the output solves the monotone scalar equation
///   s = (F*)'(theta - gamma s + R^2 / (2 (1 + gamma s)^2)),  R = |P_C vbar|.
std::pair<double, Vec4> prox_phi_pointwise(double theta, const Vec4& vbar, double gamma,
                                           const Coupling& coupling, int node, ConeTag c2,
                                           double inner_tol = 1e-11);

/// prox_{gamma phi} on a stacked point.
Vector prox_phi(const Vector& x, double gamma, const DualProblem& problem,
                double inner_tol = 1e-11);

/// prox_{gamma psi}, psi = sigma_{D_C1}(-.).
Vector prox_psi(const Vector& x, double gamma, const DualProblem& problem,
                const AffineProjector& p, const DykstraConfig& dykstra = {},
                DykstraState* state = nullptr);

enum class Algorithm { DFB0, DFB1, CP, DR };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

/// Which function takes the first (resolvent) step in DR; CP uses the same
/// function as its primal term.
enum class FirstProx { Phi, Psi };

struct BaselineConfig {
  Algorithm algorithm = Algorithm::DR;
  double gamma = 1.0;  // CP: primal step; dual step is 1 / gamma
  double tol = 1e-8;   // relative successive change
  int max_iter = 10000;
  double inner_tol = 1e-11;
  FirstProx first = FirstProx::Phi;
  std::optional<Vector> z0;  // DR governing sequence start; zero by default
  int stall_window = 0;      // as in SolverConfig

  void validate(Eigen::Index dim) const;
};

struct RunRecord {
  std::string algorithm;
  double time_s = 0.0;
  int iterations = 0;
  double gamma = 0.0;
  double nu = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  int n = 0;
  double final_residual = 0.0;  // last relative change
  bool converged = false;
  std::string error;  // nonempty when the run failed
};

struct BaselineResult {
  Vector solution;  // last primal iterate
  RunRecord record;
};

/// Called with (k, x_k, relative change) after every iteration and with
/// (0, x_0, inf) at the start.
using IterateObserver = std::function<void(int, const Vector&, double)>;

/// Douglas-Rachford on z: x = prox_{gamma f}(z), z += prox_{gamma g}(2x - z) - x,
/// stopping on the relative change of x. z starts at cfg.z0 (or zero).
BaselineResult dr_solve(const DualProblem& problem, const BaselineConfig& cfg,
                        std::shared_ptr<const AffineProjector> projector = nullptr,
                        const IterateObserver& observer = nullptr);

/// Chambolle-Pock with identity coupling operator and sigma = 1 / gamma:
///   y+ = prox_{sigma g*}(y + sigma xbar), x+ = prox_{gamma f}(x - gamma y+),
///   xbar = 2 x+ - x.
/// Started at x0 = xbar0 = prox_{gamma f}(z0), y0 = (x0 - z0) / gamma, its
/// x-sequence is the one of dr_solve from z0: substituting
/// z_{k+1} = x_k - gamma y_{k+1} turns the CP update into the DR update.
BaselineResult cp_solve(const DualProblem& problem, const BaselineConfig& cfg,
                        std::shared_ptr<const AffineProjector> projector = nullptr,
                        const IterateObserver& observer = nullptr);

struct HarnessProblem {
  Coupling coupling;
  double nu = 0.0;
};

struct HarnessOptions {
  double tol = -1.0;  // <= 0: h^3
  int max_iter = 5000;
  int stall_window = 200;  // unstable steps are abandoned instead of run to max_iter
  int timing_repeats = 3;  // the best-gamma run is repeated; median time kept
  FirstProx first = FirstProx::Phi;
  DykstraConfig dykstra;
};

struct HarnessResult {
  std::vector<RunRecord> runs;
  std::vector<RunRecord> best;  // per (problem, algorithm): fewest iterations
};

/// Runs every (problem, algorithm, gamma). gammas[k] is the sweep for
/// algorithms[k]. Failures are recorded and the sweep continues.
HarnessResult harness_run(const std::vector<HarnessProblem>& problems,
                          const std::vector<Algorithm>& algorithms,
                          const std::vector<std::vector<double>>& gammas,
                          const HarnessOptions& options = {});

/// One run of any algorithm from zero with the relative stopping rule.
RunRecord single_run(const HarnessProblem& problem, Algorithm algorithm, double gamma,
                     double tol, int max_iter, const DykstraConfig& dykstra = {},
                     std::shared_ptr<const AffineProjector> projector = nullptr,
                     Vector* solution = nullptr, FirstProx first = FirstProx::Phi,
                     int stall_window = 0);

void write_records_csv(std::ostream& os, const std::vector<RunRecord>& rows);

}  // namespace fbmfg
