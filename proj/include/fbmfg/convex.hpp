#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>

namespace fbmfg {

using Vector = Eigen::VectorXd;
using Vec4 = Eigen::Vector4d;

/// The two cones a per-node flux may be restricted to:
/// K = R+ x R- x R+ x R- (upwind sign pattern) or the whole of R^4.
enum class ConeTag { K, FullSpace };

/// Euclidean projection onto K (componentwise clamp).
inline Vec4 project_K(const Vec4& xi) {
  return Vec4(std::max(xi[0], 0.0), std::min(xi[1], 0.0),
              std::max(xi[2], 0.0), std::min(xi[3], 0.0));
}

/// Projection onto the polar cone K^- = R- x R+ x R- x R+.
inline Vec4 project_polar_K(const Vec4& xi) { return xi - project_K(xi); }

inline Vec4 project_cone(ConeTag c, const Vec4& xi) {
  return c == ConeTag::K ? project_K(xi) : xi;
}

/// Conjugate of l = |.|^2/2 + indicator of [0, inf): s -> max(s, 0)^2 / 2.
inline double ell_star_quad(double s) {
  const double p = std::max(s, 0.0);
  return 0.5 * p * p;
}

inline double ell_star_quad_prime(double s) { return std::max(s, 0.0); }

/// zeta_C(xi) = l*'(|P_C xi|) / |P_C xi| * P_C xi, and 0 when P_C xi = 0.
/// This is the gradient of xi -> l*(|P_C xi|).
template <class LStarPrime>
Vec4 zeta(ConeTag c, const Vec4& xi, LStarPrime&& lstar_prime) {
  const Vec4 p = project_cone(c, xi);
  const double r = p.norm();
  if (r == 0.0) return Vec4::Zero();
  return (lstar_prime(r) / r) * p;
}

/// zeta_C for the quadratic Hamiltonian, where it reduces to P_C.
inline Vec4 zeta_quad(ConeTag c, const Vec4& xi) {
  return project_cone(c, xi);
}

/// prox of gamma * sigma_D through the Moreau decomposition:
/// x - gamma * P_D(x / gamma).
Vector prox_support_from_projection(
    double gamma, const std::function<Vector(const Vector&)>& projector,
    const Vector& x);

/// Principal branch of Lambert W evaluated at e^y, i.e. the positive root of
/// w + ln(w) = y. Taking the exponent instead of the argument keeps large
/// arguments representable.
double lambert_w0_of_log(double y);

}  // namespace fbmfg
