#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmfg/dfb.hpp"
#include "fbmfg/errors.hpp"
#include "fbmfg/experiment.hpp"

#include <random>

using namespace fbmfg;

namespace {

Vector gaussian(Eigen::Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(size);
  for (auto& e : v) e = g(rng);
  return v;
}

}  // namespace

TEST_CASE("prox of psi for the affine set solves its optimality condition") {
  // psi(x) = sigma_D(-x) is finite only on range(A^T), where it equals
  // -<x, d0> for any d0 in D. Hence prox_{g psi}(z) = P_range(z + g d0).
  const int n = 5;
  const DualProblem problem(Coupling::log_gomes(n), Placement::DFB1, 0.3);
  auto proj = std::make_shared<const AffineProjector>(n, 0.3);
  const ProxOracle prox = make_prox_oracle(problem, proj);
  const Vector d0 = proj->project(Vector::Zero(problem.dim()));
  const auto p_range = [&](const Vector& v) { return Vector(v - proj->project(v) + d0); };
  std::mt19937_64 rng(1);
  for (double gamma : {0.1, 1.0, 10.0}) {
    for (int t = 0; t < 20; ++t) {
      const Vector z = gaussian(problem.dim(), rng);
      const Vector p = prox.prox(gamma, z);
      CHECK((p - p_range(z + gamma * d0)).norm() <= 1e-10 * (1.0 + z.norm()));
    }
  }
}

TEST_CASE("prox of psi for D_K: z - p lies in gamma times the subdifferential") {
  // z - p in gamma d(psi)(p) means d = (p - z) / gamma lies in D_K and
  // maximizes <-p, .> over D_K.
  const int n = 3;
  const DualProblem problem(Coupling::log_gomes(n), Placement::DFB0, 0.2);
  auto proj = std::make_shared<const AffineProjector>(n, 0.2);
  const ProxOracle prox = make_prox_oracle(problem, proj);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const double gamma = 0.5;
    const Vector z = gaussian(problem.dim(), rng);
    const Vector p = prox.prox(gamma, z);
    const Vector d = (p - z) / gamma;
    CHECK(proj->residual(d) <= 1e-8);
    for (int s = 0; s < 10; ++s) {
      const Vector other = project_DK(gaussian(problem.dim(), rng), *proj, DykstraConfig{});
      CHECK((-p).dot(d) >= (-p).dot(other) - 1e-6);
    }
  }
}

TEST_CASE("DFB1 and DFB0 on the log example at N = 2 reach the explicit solution") {
  for (Placement pl : {Placement::DFB0, Placement::DFB1}) {
    const DualProblem problem(Coupling::log_gomes(2), pl, 0.0);
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.tol = 1e-12;
    cfg.max_iter = 20000;
    const DfbResult r = solve_dfb(problem, random_init(Vector::Zero(problem.dim()), 1.0, 3), cfg);
    CHECK(r.report.termination == Termination::Converged);
    CHECK(r.report.final_point.norm() < 1e-8);
  }
}

TEST_CASE("Fejer monotonicity and bound domination on the log example") {
  const int n = 12;
  const Vector xs = explicit_solution_log(n).stacked();
  for (double radius : {0.1, 0.5}) {
    const LocalConstants lc = local_constants_log(n, radius);
    const double gamma = optimal_step(lc.mu, lc.lip).gamma_star;
    for (Placement pl : {Placement::DFB0, Placement::DFB1}) {
      const DualProblem problem(Coupling::log_gomes(n), pl, 0.0);
      SolverConfig cfg;
      cfg.gamma = gamma;
      cfg.tol = 1e-7;
      cfg.max_iter = 5000;
      cfg.stopping = StoppingKind::ExactError;
      cfg.target = xs;
      if (pl == Placement::DFB0) cfg.rho = contraction_factor(lc.mu, lc.lip, gamma);
      const DfbResult r = solve_dfb(problem, random_init(xs, radius, 5), cfg);
      CHECK(r.report.termination == Termination::Converged);
      const auto& h = r.report.history;
      CHECK(*h[0].exact_error == doctest::Approx(radius).epsilon(1e-12));
      for (std::size_t k = 1; k < h.size(); ++k)
        CHECK(*h[k].exact_error <= *h[k - 1].exact_error + 1e-12);
      if (pl == Placement::DFB0) {
        CHECK(r.inner_iterations > 0);
        for (const auto& e : h) CHECK(*e.exact_error <= *e.bound + 1e-10);
      }
    }
  }
}

TEST_CASE("projector mismatch is rejected") {
  const DualProblem problem(Coupling::log_gomes(4), Placement::DFB1, 0.1);
  CHECK_THROWS_AS(make_prox_oracle(problem, std::make_shared<const AffineProjector>(5, 0.1)),
                  ContractError);
  CHECK_THROWS_AS(make_prox_oracle(problem, nullptr), ContractError);
}
