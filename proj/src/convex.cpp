#include "fbmfg/convex.hpp"

#include "fbmfg/errors.hpp"

#include <limits>
#include <string>

namespace fbmfg {

Vector prox_support_from_projection(
    double gamma, const std::function<Vector(const Vector&)>& projector,
    const Vector& x) {
  if (!(gamma > 0.0)) throw DomainError("prox_support: gamma must be positive");
  try {
    return x - gamma * projector(x / gamma);
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(std::string("prox of support function: ") + e.what(),
                              e.last_change(), e.last_residual());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("prox of support function: ") + e.what());
  }
}

namespace {

inline double residual(double w, double y) { return w + std::log(w) - y; }

double bisect(double lo, double hi, double y) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    if (residual(mid, y) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double lambert_w0_of_log(double y) {
  if (!std::isfinite(y))
    throw DomainError("lambert_w0_of_log: argument must be finite");

  // g(w) = w + ln w - y is increasing and concave on (0, inf).
  double lo, hi, w;
  if (y <= 1.0) {
    lo = std::exp(y - 1.0);
    hi = std::exp(y);
    w = hi;
  } else {
    lo = y - std::log(y);
    hi = y;
    w = lo;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 100; ++it) {
    const double g = residual(w, y);
    if (g == 0.0) return w;
    if (g > 0.0)
      hi = std::min(hi, w);
    else
      lo = std::max(lo, w);

    // Halley step: g' = 1 + 1/w, g'' = -1/w^2.
    const double g1 = 1.0 + 1.0 / w;
    const double g2 = -1.0 / (w * w);
    const double step = g / (g1 - 0.5 * g * g2 / g1);
    double next = w - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 4.0 * eps * w) return next;
    w = next;
  }
  const double fallback = bisect(lo, hi, y);
  if (std::abs(residual(fallback, y)) > 1e-12 * std::max(1.0, std::abs(y)))
    throw NumericalError("lambert_w0_of_log: no convergence at y = " +
                         std::to_string(y));
  return fallback;
}

}  // namespace fbmfg
