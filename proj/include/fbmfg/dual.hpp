#pragma once

// Dual of the discrete variational MFG:
//   min_{theta, v} sigma_{D_C1}(-theta, -v)
//                  + sum_{i,j} F*_{ij}(theta_ij + l*(|P_C2 v_ij|)),
// with l = |.|^2/2 + indicator of [0, inf), so l*(r) = max(r, 0)^2 / 2.

#include "fbmfg/grid.hpp"
#include "fbmfg/splitting.hpp"

namespace fbmfg {

enum class CouplingKind { LogGomes, PowerEntropy };

/// c_ij = sin(2 pi i h) + sin(2 pi j h) for LogGomes and
/// c_ij = -(sin(2 pi x) + sin(2 pi y) + cos(4 pi x)) / 2 at x = ih, y = jh
/// for PowerEntropy.
GridFunction coupling_field(CouplingKind kind, int n);

/// (F*)'(rho) = exp(rho + c) for F(m) = m (ln m - 1) - c m.
/// Throws NumericalError when rho + c exceeds the overflow threshold.
double fstar_prime_log(double rho, double c);

/// (F*)' for F(m) = m^alpha / alpha + c m + epsilon m (ln m - 1).
double fstar_prime_power_entropy(double rho, double c, double alpha, double epsilon);

inline constexpr double kExpArgumentLimit = 700.0;

/// Per-node convex coupling F_ij together with its conjugate derivative.
struct Coupling {
  CouplingKind kind = CouplingKind::LogGomes;
  double alpha = 2.0;
  double epsilon = 0.0;
  GridFunction c;

  static Coupling log_gomes(int n);
  static Coupling power_entropy(int n, double alpha, double epsilon);

  int n() const { return c.n; }

  /// (F*_ij)'(rho); nonnegative and nondecreasing.
  double fstar_prime(int node, double rho) const;
  /// (F*_ij)''(rho), the derivative of fstar_prime.
  double fstar_second(int node, double rho) const;
  /// f(x_ij, m) = F_ij'(m) for m > 0.
  double f(int node, double m) const;
  /// F_ij(m), +inf for m < 0.
  double value(int node, double m) const;
};

/// Where the cone K enters: DFB0 puts it in the feasible set (C1 = K,
/// C2 = R^4), DFB1 in the smooth term (C1 = R^4, C2 = K).
enum class Placement { DFB0, DFB1 };

inline ConeTag cone_c1(Placement p) { return p == Placement::DFB0 ? ConeTag::K : ConeTag::FullSpace; }
inline ConeTag cone_c2(Placement p) { return p == Placement::DFB0 ? ConeTag::FullSpace : ConeTag::K; }

struct DualPoint {
  GridFunction theta;
  VectorField v;

  DualPoint() = default;
  explicit DualPoint(int n) : theta(n), v(n) {}
  DualPoint(GridFunction t, VectorField w);

  int n() const { return theta.n; }
  Vector stacked() const { return stack(theta, v); }
  static DualPoint from_stacked(const Vector& x, int n);
};

struct DualProblem {
  Coupling coupling;
  Placement placement = Placement::DFB1;
  double nu = 0.0;
  int n = 0;

  DualProblem() = default;
  DualProblem(Coupling c, Placement p, double nu_);

  Eigen::Index dim() const { return 5 * static_cast<Eigen::Index>(n) * n; }
};

/// grad phi on the stacked layout: per node s = (F*)'(theta + l*(|P_C2 v|)),
/// theta-part s and v-part s * zeta_C2(v).
Vector grad_phi(const Vector& x, const DualProblem& problem);
DualPoint grad_phi(const DualPoint& x, const DualProblem& problem);

/// Known dual solution of the first-order log example:
/// theta* = t* = -ln(h^2 sum exp(c_ij)), v* = 0.
DualPoint explicit_solution_log(int n);

/// g(M) = max_{x in [0, M]} e^{sqrt(M - x)} (1 + x/2 + (2 + x/2) sqrt(x / (4 + x))).
double g_function(double M);

/// Local moduli of grad phi for the log example with C2 = R^4 on the ball of
/// radius M0 around the explicit solution:
/// lip = e^{t* + max c} g(M0^2), mu = e^{t* + min c - M0}.
LocalConstants local_constants_log(int n, double M0);

/// Step 1.99 / lip, the near-critical step used for the non-strongly
/// convex placement.
double near_critical_step(double lip, double factor = 1.99);

}  // namespace fbmfg
