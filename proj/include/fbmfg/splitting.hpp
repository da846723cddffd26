#pragma once

// Forward-backward splitting for min psi(x) + phi(x), where grad phi is only
// required to be Lipschitz (and possibly strongly monotone) on balls.

#include "fbmfg/convex.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace fbmfg {

/// Gradient of the smooth term.
struct SmoothOracle {
  std::function<Vector(const Vector&)> grad;
  Eigen::Index dim = 0;
};

/// prox_{gamma psi} of the nonsmooth term.
struct ProxOracle {
  std::function<Vector(double, const Vector&)> prox;
};

/// Strong monotonicity (mu) and Lipschitz (lip) moduli of grad phi on the
/// ball of the given radius around center.
struct LocalConstants {
  double mu = 0.0;
  double lip = 0.0;
  double radius = 0.0;
  Vector center;
};

enum class StoppingKind { SuccessiveRelative, ExactError };

struct SolverConfig {
  double gamma = 1.0;
  double tol = 1e-8;
  int max_iter = 1000;
  StoppingKind stopping = StoppingKind::SuccessiveRelative;
  /// Known solution; required by ExactError, otherwise used only for the
  /// recorded exact errors.
  std::optional<Vector> target;
  /// Contraction factor; when set together with target the history carries
  /// the a priori bound rho^n * |x0 - x*|.
  std::optional<double> rho;
  /// > 0: give up (Termination::Stalled) once the relative change has gone
  /// this many iterations without a new minimum.
  int stall_window = 0;

  void validate(Eigen::Index dim) const;
};

struct HistoryEntry {
  int iteration = 0;
  std::optional<double> exact_error;
  std::optional<double> relative_change;  // absent at iteration 0
  std::optional<double> bound;
  double elapsed = 0.0;  // seconds since the loop started
};

enum class Termination { Converged, MaxIter, Stalled };

/// Tracks the running minimum of the relative change; true once it has not
/// improved for `window` consecutive iterations. A window of 0 never fires.
class StallGuard {
 public:
  explicit StallGuard(int window) : window_(window) {}
  bool operator()(double change) {
    if (window_ <= 0) return false;
    if (change < best_) {
      best_ = change;
      since_ = 0;
      return false;
    }
    return ++since_ >= window_;
  }

 private:
  int window_;
  double best_ = std::numeric_limits<double>::infinity();
  int since_ = 0;
};

struct SolveReport {
  Vector final_point;
  int iterations = 0;
  std::vector<HistoryEntry> history;  // iterations + 1 entries
  double elapsed = 0.0;
  Termination termination = Termination::MaxIter;
};

/// |x_{n+1} - x_n| / |x_n|, with the convention 0/0 = 0 and c/0 = inf.
double relative_change(const Vector& next, const Vector& current);

/// One step x -> prox_{gamma psi}(x - gamma grad phi(x)).
Vector fbs_iterate(const Vector& x, const SmoothOracle& smooth,
                   const ProxOracle& prox, double gamma);

/// Iterates fbs_iterate from x0 until the stopping rule holds or max_iter is
/// reached. Throws DivergedError on non-finite iterates.
SolveReport fbs_solve(const Vector& x0, const SmoothOracle& smooth,
                      const ProxOracle& prox, const SolverConfig& cfg);

/// rho = max{|1 - gamma mu|, |1 - gamma lip|} for 0 < mu <= lip and
/// 0 < gamma < 2 / lip.
double contraction_factor(double mu, double lip, double gamma);

struct OptimalStep {
  double gamma_star;
  double rho_star;
};

/// gamma* = 2 / (lip + mu), which minimizes the contraction factor.
OptimalStep optimal_step(double mu, double lip);

/// rho^n * e0.
double theoretical_error_bound(double rho, int n, double e0);

}  // namespace fbmfg
