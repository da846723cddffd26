#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmfg/errors.hpp"
#include "fbmfg/projection.hpp"

#include <Eigen/Dense>

#include <random>

using namespace fbmfg;

namespace {

std::mt19937_64 rng(21);

Vector gaussian(Eigen::Index size, double scale = 1.0) {
  std::normal_distribution<double> g;
  Vector v(size);
  for (auto& e : v) e = scale * g(rng);
  return v;
}

// Dense KKT solve x - A^T (A A^T)^+ (A x - b).
Vector dense_projection(const Vector& x, const ConstraintOperator& op) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(op.A);
  const Eigen::MatrixXd AAt = A * A.transpose();
  return x - A.transpose() * AAt.completeOrthogonalDecomposition().solve(A * x - op.b);
}

Vector null_vector(const ConstraintOperator& op) {
  const Vector r = gaussian(op.cols());
  const Eigen::MatrixXd A = Eigen::MatrixXd(op.A);
  return r - A.transpose() * (A * A.transpose()).completeOrthogonalDecomposition().solve(A * r);
}

bool in_cone_set(const Vector& x, int n) {
  const int s = n * n;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < s; ++j) {
      const double v = x[(k + 1) * s + j];
      if ((k % 2 == 0 && v < 0.0) || (k % 2 == 1 && v > 0.0)) return false;
    }
  return true;
}

Vector uniform_feasible(int n) { return stack(GridFunction::constant(n, 1.0), VectorField(n)); }

}  // namespace

TEST_CASE("affine projection matches the dense KKT solve") {
  for (int n : {2, 3, 4, 7}) {
    for (double nu : {0.0, 0.3}) {
      const AffineProjector p(n, nu);
      for (int t = 0; t < 10; ++t) {
        const Vector x = gaussian(p.dim(), 2.0);
        const Vector px = p.project(x);
        CHECK((px - dense_projection(x, p.constraint())).norm() <= 1e-10 * (1.0 + x.norm()));
        CHECK(p.residual(px) <= 1e-10 * (1.0 + p.constraint().b.norm()));
      }
    }
  }
}

TEST_CASE("affine projection: feasible points, origin, orthogonality") {
  const int n = 6;
  const AffineProjector p(n, 0.5);
  const Vector feas = uniform_feasible(n);
  CHECK((p.project(feas) - feas).norm() < 1e-13);
  CHECK((p.project(Vector::Zero(p.dim())) - feas).norm() < 1e-12);
  for (int t = 0; t < 50; ++t) {
    const Vector x = gaussian(p.dim());
    const Vector px = p.project(x);
    const Vector z = null_vector(p.constraint());
    CHECK(std::abs((x - px).dot(z)) <= 1e-10 * z.norm() * (1.0 + x.norm()));
    // Another feasible point y = px + z.
    const Vector y = px + 0.7 * z;
    CHECK(std::abs((x - px).dot(y - px)) <= 1e-10 * (1.0 + x.norm()) * (1.0 + z.norm()));
  }
}

TEST_CASE("affine projection at the experiment size") {
  const AffineProjector p(60, 0.1);
  for (int t = 0; t < 5; ++t) {
    const Vector px = p.project(gaussian(p.dim(), 10.0));
    CHECK(p.residual(px) <= 1e-10 * (1.0 + p.constraint().b.norm()));
    CHECK((p.project(px) - px).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(p.project(Vector::Zero(5)), ContractError);
}

TEST_CASE("cone set projection clamps the flux blocks only") {
  const int n = 3;
  const Vector x = gaussian(5 * n * n);
  const Vector y = project_cone_set(x, n);
  CHECK(y.head(n * n) == x.head(n * n));
  CHECK(in_cone_set(y, n));
  for (int k = 0; k < n * n; ++k) {
    const Vec4 v(x[n * n + k], x[2 * n * n + k], x[3 * n * n + k], x[4 * n * n + k]);
    const Vec4 pv = project_K(v);
    for (int d = 0; d < 4; ++d) CHECK(y[(d + 1) * n * n + k] == pv[d]);
  }
}

TEST_CASE("Dykstra projection onto D_K") {
  const int n = 4;
  const AffineProjector p(n, 0.5);
  const DykstraConfig cfg;
  const Vector feas = uniform_feasible(n);
  CHECK((project_DK(feas, p, cfg) - feas).norm() <= 1e-10);

  // Cone constraint inactive: D_K projection equals the affine one. Constant
  // w has zero divergence, so this center is feasible and interior to K.
  VectorField w(n);
  for (int k = 0; k < n * n; ++k) w.set(k, Vec4(1, -1, 1, -1));
  const Vector x = stack(GridFunction::constant(n, 1.0), w) + gaussian(p.dim(), 0.01);
  const Vector pa = p.project(x);
  REQUIRE(in_cone_set(pa, n));
  CHECK((project_DK(x, p, cfg) - pa).norm() <= 1e-9);

  for (int t = 0; t < 20; ++t) {
    const Vector y = gaussian(p.dim());
    const Vector py = project_DK(y, p, cfg);
    CHECK(in_cone_set(py, n));
    CHECK(p.residual(py) <= cfg.affine_tol);
    // Variational inequality against feasible points of D_K.
    const Vector q = project_DK(gaussian(p.dim()), p, cfg);
    CHECK((y - py).dot(q - py) <= 1e-7 * (1.0 + y.norm()));
  }
}

TEST_CASE("warm starting does not change the limit") {
  const int n = 5;
  const AffineProjector p(n, 0.2);
  DykstraConfig warm;
  DykstraConfig cold;
  cold.warm_start = false;
  DykstraState state;
  const Vector base = gaussian(p.dim());
  for (int t = 0; t < 10; ++t) {
    const Vector x = base + gaussian(p.dim(), 0.05);
    const Vector a = project_DK(x, p, warm, &state);
    const Vector b = project_DK(x, p, cold);
    CHECK((a - b).norm() <= 10 * 1e-8);
  }
  CHECK(state.total_inner > 0);
}

TEST_CASE("Dykstra reports failure to converge") {
  const AffineProjector p(4, 0.5);
  DykstraConfig cfg;
  cfg.max_inner = 1;
  CHECK_THROWS_AS(project_DK(gaussian(p.dim(), 5.0), p, cfg), NonConvergenceError);
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}
