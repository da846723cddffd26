#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmfg/convex.hpp"

#include <random>

using namespace fbmfg;

namespace {

// Root of w + ln w = y by plain bisection.
double lambert_bisect(double y) {
  double lo = 1e-300, hi = std::max(1.0, y + 1.0);
  for (int k = 0; k < 3000; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mid + std::log(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("project_K and its polar") {
  CHECK(project_K(Vec4(1, 1, 1, 1)) == Vec4(1, 0, 1, 0));
  CHECK(project_K(Vec4::Zero()) == Vec4::Zero());
  CHECK(project_K(Vec4(-1, -2, 3, 4)) == Vec4(0, -2, 3, 0));
  CHECK(project_polar_K(Vec4(1, 1, 1, 1)) == Vec4(0, 1, 0, 1));
  CHECK(project_polar_K(Vec4(2, -3, 0, -1)) == Vec4::Zero());
  CHECK(project_polar_K(Vec4(-1, -2, 3, 4)) == Vec4(-1, 0, 0, 4));
}

TEST_CASE("cone projection is idempotent, nonexpansive, and splits orthogonally") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 1000; ++t) {
    const Vec4 a(g(rng), g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng), g(rng));
    CHECK(project_K(project_K(a)) == project_K(a));
    CHECK((project_K(a) - project_K(b)).norm() <= (a - b).norm() + 1e-15);
    CHECK((project_K(a) + project_polar_K(a) - a).norm() == doctest::Approx(0.0));
    CHECK(project_K(a).dot(project_polar_K(a)) == doctest::Approx(0.0));
  }
}

TEST_CASE("quadratic l* and its derivative") {
  CHECK(ell_star_quad(-3) == 0.0);
  CHECK(ell_star_quad_prime(-3) == 0.0);
  CHECK(ell_star_quad(2) == 2.0);
  CHECK(ell_star_quad_prime(2) == 2.0);
  CHECK(ell_star_quad(0) == 0.0);
  CHECK(ell_star_quad_prime(0) == 0.0);
}

TEST_CASE("zeta") {
  const Vec4 xi(0.3, -1.2, 2.0, 0.7);
  CHECK(zeta_quad(ConeTag::FullSpace, xi) == xi);
  CHECK(zeta(ConeTag::FullSpace, xi, ell_star_quad_prime).isApprox(xi));
  CHECK(zeta(ConeTag::K, Vec4(-1, 1, -1, 1), ell_star_quad_prime) == Vec4::Zero());
  CHECK(zeta(ConeTag::K, Vec4(3, 4, 0, 0), ell_star_quad_prime).isApprox(Vec4(3, 0, 0, 0)));
}

TEST_CASE("prox of a support function from a projection") {
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Vector d = (Vector(3) << 0.2, 0.1, -0.4).finished();
  const double gamma = 0.7;
  auto point = [&](const Vector&) { return d; };
  CHECK((prox_support_from_projection(gamma, point, x) - (x - gamma * d)).norm() < 1e-15);
  auto identity = [](const Vector& v) { return v; };
  CHECK(prox_support_from_projection(gamma, identity, x).norm() < 1e-15);

  // D a half space {y : a.y <= 1}; check x - p in gamma * (subdifferential of
  // sigma_D at p) via p = x - gamma P_D(x / gamma) and the normal cone of D.
  const Vector a = (Vector(3) << 1.0, 2.0, -1.0).finished();
  auto halfspace = [&](const Vector& v) -> Vector {
    const double s = a.dot(v) - 1.0;
    return s > 0 ? Vector(v - s / a.squaredNorm() * a) : v;
  };
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    const Vector y = (Vector(3) << 3 * g(rng), 3 * g(rng), 3 * g(rng)).finished();
    const Vector p = prox_support_from_projection(gamma, halfspace, y);
    const Vector dpt = (y - p) / gamma;  // element of D attaining sigma_D(p)
    CHECK(a.dot(dpt) <= 1.0 + 1e-12);
    // p lies in the normal cone of D at dpt: p = 0 or p parallel to a with a.dpt = 1.
    if (p.norm() > 1e-12) {
      CHECK(std::abs(a.dot(dpt) - 1.0) < 1e-12);
      CHECK((p - p.dot(a) / a.squaredNorm() * a).norm() < 1e-12);
      CHECK(p.dot(a) > 0);
    }
  }
}

TEST_CASE("Lambert W through its log argument") {
  CHECK(lambert_w0_of_log(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w0_of_log(0.0) == doctest::Approx(0.5671432904097838).epsilon(1e-14));
  const double y = -30.0;
  CHECK(lambert_w0_of_log(y) == doctest::Approx(lambert_bisect(y)).epsilon(1e-13));
  CHECK(lambert_w0_of_log(y) == doctest::Approx(std::exp(y)).epsilon(1e-12));
  for (double t = -30.0; t <= 700.0; t += 0.37) {
    const double w = lambert_w0_of_log(t);
    REQUIRE(std::isfinite(w));
    CHECK(w == doctest::Approx(lambert_bisect(t)).epsilon(1e-12));
    CHECK(std::abs(std::expm1(w + std::log(w) - t)) <= 1e-12 * std::max(1.0, std::exp(-t)) + 1e-15);
  }
}
