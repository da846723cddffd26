#include "fbmfg/dual.hpp"

#include "fbmfg/errors.hpp"
#include "fbmfg/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fbmfg {

GridFunction coupling_field(CouplingKind kind, int n) {
  GridFunction c(n);
  const double h = 1.0 / n;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = i * h;
      const double y = j * h;
      if (kind == CouplingKind::LogGomes)
        c(i, j) = std::sin(two_pi * x) + std::sin(two_pi * y);
      else
        c(i, j) = -(std::sin(two_pi * x) + std::sin(two_pi * y) + std::cos(2.0 * two_pi * x)) / 2.0;
    }
  }
  return c;
}

double fstar_prime_log(double rho, double c) {
  const double arg = rho + c;
  if (!(arg <= kExpArgumentLimit))
    throw NumericalError("exp overflow in (F*)': argument " + std::to_string(arg));
  return std::exp(arg);
}

double fstar_prime_power_entropy(double rho, double c, double alpha, double epsilon) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw DomainError("power-entropy coupling: alpha must lie in (1, 2]");
  if (!(epsilon >= 0.0)) throw DomainError("power-entropy coupling: epsilon must be >= 0");
  const double q = alpha - 1.0;
  if (epsilon == 0.0) {
    if (rho < c) return 0.0;
    return std::pow(rho - c, 1.0 / q);
  }
  const double k = q / epsilon;
  const double w = lambert_w0_of_log(k * (rho - c) + std::log(k));
  return std::pow(w / k, 1.0 / q);
}

Coupling Coupling::log_gomes(int n) {
  Coupling out;
  out.kind = CouplingKind::LogGomes;
  out.c = coupling_field(CouplingKind::LogGomes, n);
  return out;
}

Coupling Coupling::power_entropy(int n, double alpha, double epsilon) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw DomainError("power-entropy coupling: alpha must lie in (1, 2]");
  if (!(epsilon >= 0.0)) throw DomainError("power-entropy coupling: epsilon must be >= 0");
  Coupling out;
  out.kind = CouplingKind::PowerEntropy;
  out.alpha = alpha;
  out.epsilon = epsilon;
  out.c = coupling_field(CouplingKind::PowerEntropy, n);
  return out;
}

double Coupling::fstar_prime(int node, double rho) const {
  if (kind == CouplingKind::LogGomes) {
    try {
      return fstar_prime_log(rho, c.data[node]);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at node " + std::to_string(node));
    }
  }
  return fstar_prime_power_entropy(rho, c.data[node], alpha, epsilon);
}

double Coupling::fstar_second(int node, double rho) const {
  if (kind == CouplingKind::LogGomes) return fstar_prime(node, rho);
  const double q = alpha - 1.0;
  if (epsilon == 0.0) {
    const double d = rho - c.data[node];
    if (d <= 0.0) return 0.0;
    return std::pow(d, 1.0 / q - 1.0) / q;
  }
  // Inverse function rule: (F*)'' = 1 / F''((F*)').
  const double y = fstar_prime(node, rho);
  if (y == 0.0) return 0.0;
  return 1.0 / (q * std::pow(y, alpha - 2.0) + epsilon / y);
}

double Coupling::f(int node, double m) const {
  if (kind == CouplingKind::LogGomes) return std::log(m) - c.data[node];
  double out = std::pow(m, alpha - 1.0) + c.data[node];
  if (epsilon > 0.0) out += epsilon * std::log(m);
  return out;
}

double Coupling::value(int node, double m) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (m < 0.0) return inf;
  if (m == 0.0) return 0.0;
  if (kind == CouplingKind::LogGomes) return m * (std::log(m) - 1.0) - c.data[node] * m;
  double out = std::pow(m, alpha) / alpha + c.data[node] * m;
  if (epsilon > 0.0) out += epsilon * m * (std::log(m) - 1.0);
  return out;
}

DualPoint::DualPoint(GridFunction t, VectorField w) : theta(std::move(t)), v(std::move(w)) {
  if (theta.n != v.n) throw ContractError("dual point: grid sizes differ");
}

DualPoint DualPoint::from_stacked(const Vector& x, int n) {
  return DualPoint(stacked_scalar(x, n), stacked_field(x, n));
}

DualProblem::DualProblem(Coupling c, Placement p, double nu_)
    : coupling(std::move(c)), placement(p), nu(nu_), n(coupling.n()) {
  if (!(nu >= 0.0)) throw ContractError("dual problem: nu must be nonnegative");
}

Vector grad_phi(const Vector& x, const DualProblem& problem) {
  const int s = problem.n * problem.n;
  if (x.size() != 5 * s) throw ContractError("grad_phi: point has the wrong dimension");
  const ConeTag c2 = cone_c2(problem.placement);
  Vector g(x.size());
  parallel_for(0, s, [&](int k) {
    const Vec4 v(x[s + k], x[2 * s + k], x[3 * s + k], x[4 * s + k]);
    const Vec4 p = project_cone(c2, v);
    const double slope = problem.coupling.fstar_prime(k, x[k] + ell_star_quad(p.norm()));
    g[k] = slope;
    const Vec4 gv = slope * zeta_quad(c2, v);
    for (int d = 0; d < 4; ++d) g[(d + 1) * s + k] = gv[d];
  });
  return g;
}

DualPoint grad_phi(const DualPoint& x, const DualProblem& problem) {
  if (x.n() != problem.n) throw ContractError("grad_phi: grid size mismatch");
  return DualPoint::from_stacked(grad_phi(x.stacked(), problem), problem.n);
}

DualPoint explicit_solution_log(int n) {
  const GridFunction c = coupling_field(CouplingKind::LogGomes, n);
  const double h2 = 1.0 / (static_cast<double>(n) * n);
  const double t_star = -std::log(h2 * c.data.array().exp().sum());
  return DualPoint(GridFunction::constant(n, t_star), VectorField(n));
}

double g_function(double M) {
  if (!(M >= 0.0)) throw DomainError("g_function: M must be nonnegative");
  const auto G = [M](double x) {
    return std::exp(std::sqrt(std::max(M - x, 0.0))) *
           (1.0 + x / 2.0 + (2.0 + x / 2.0) * std::sqrt(x / (4.0 + x)));
  };
  if (M == 0.0) return G(0.0);

  // Golden-section search for the maximizer.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = M;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = G(x1), f2 = G(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = G(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = G(x1);
    }
  }
  return std::max({G(0.5 * (a + b)), G(0.0), G(M)});
}

LocalConstants local_constants_log(int n, double M0) {
  if (!(M0 > 0.0)) throw DomainError("local_constants_log: M0 must be positive");
  const DualPoint xs = explicit_solution_log(n);
  const GridFunction c = coupling_field(CouplingKind::LogGomes, n);
  const double t_star = xs.theta.data[0];
  LocalConstants out;
  out.lip = std::exp(t_star + c.data.maxCoeff()) * g_function(M0 * M0);
  out.mu = std::exp(t_star + c.data.minCoeff() - M0);
  out.radius = M0;
  out.center = xs.stacked();
  return out;
}

double near_critical_step(double lip, double factor) {
  if (!(lip > 0.0)) throw DomainError("near_critical_step: lip must be positive");
  return factor / lip;
}

}  // namespace fbmfg
