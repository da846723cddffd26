#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmfg/baselines.hpp"
#include "fbmfg/errors.hpp"

#include <random>
#include <sstream>

using namespace fbmfg;

namespace {

// Per-node gradient of F*(t + l*(|P_C w|)).
std::pair<double, Vec4> node_grad(double t, const Vec4& w, const Coupling& c, int node, ConeTag c2) {
  const Vec4 p = project_cone(c2, w);
  const double s = c.fstar_prime(node, t + ell_star_quad(p.norm()));
  return {s, s * p};
}

}  // namespace

TEST_CASE("prox of phi: small step limit") {
  const Coupling c = Coupling::power_entropy(4, 1.5, 0.1);
  const Vec4 v(0.3, -0.2, 1.0, 0.5);
  const auto [t, w] = prox_phi_pointwise(0.4, v, 1e-8, c, 5, ConeTag::K);
  CHECK(std::abs(t - 0.4) <= 1e-6);
  CHECK((w - v).norm() <= 1e-6);
}

TEST_CASE("prox of phi: scalar log case") {
  const Coupling c = Coupling::log_gomes(2);  // c = 0 at every node
  for (double theta : {-5.0, -0.3, 0.0, 1.2, 6.0})
    for (double gamma : {0.01, 0.5, 3.0}) {
      const auto [t, w] = prox_phi_pointwise(theta, Vec4::Zero(), gamma, c, 0, ConeTag::FullSpace);
      CHECK(std::abs(t + gamma * std::exp(t) - theta) <= 1e-11 * std::max(1.0, std::exp(t)));
      CHECK(w == Vec4::Zero());
    }
}

TEST_CASE("prox of phi satisfies the prox characterization") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> node(0, 35);
  const std::vector<Coupling> couplings{Coupling::log_gomes(6), Coupling::power_entropy(6, 1.5, 0.1),
                                        Coupling::power_entropy(6, 1.5, 0.0),
                                        Coupling::power_entropy(6, 1.8, 0.5)};
  for (const auto& c : couplings)
    for (ConeTag c2 : {ConeTag::K, ConeTag::FullSpace})
      for (double gamma : {0.05, 0.7, 4.0})
        for (int trial = 0; trial < 50; ++trial) {
          const int k = node(rng);
          const double theta = g(rng);
          const Vec4 v(g(rng), g(rng), g(rng), g(rng));
          const auto [t, w] = prox_phi_pointwise(theta, v, gamma, c, k, c2);
          const auto [gt, gw] = node_grad(t, w, c, k, c2);
          const double scale = std::max(1.0, gt);
          CHECK(std::abs(t + gamma * gt - theta) <= 1e-9 * scale);
          CHECK((w + gamma * gw - v).norm() <= 1e-9 * scale * (1.0 + v.norm()));
        }
}

TEST_CASE("CP and DR iterates coincide at critical steps") {
  struct Case {
    Coupling c;
    double nu;
    double gamma;
  };
  const std::vector<Case> cases{{Coupling::log_gomes(20), 0.0, 1.0},
                                {Coupling::power_entropy(8, 1.5, 0.1), 0.5, 0.9},
                                {Coupling::power_entropy(8, 1.5, 0.0), 0.1, 1.3}};
  for (const auto& cs : cases) {
    for (FirstProx first : {FirstProx::Phi, FirstProx::Psi}) {
      const DualProblem problem(cs.c, Placement::DFB1, cs.nu);
      BaselineConfig cfg;
      cfg.gamma = cs.gamma;
      cfg.tol = 1e-300;
      cfg.max_iter = 50;
      cfg.first = first;
      std::vector<Vector> dr, cp;
      dr_solve(problem, cfg, nullptr, [&](int, const Vector& x, double) { dr.push_back(x); });
      cp_solve(problem, cfg, nullptr, [&](int, const Vector& x, double) { cp.push_back(x); });
      REQUIRE(dr.size() == cp.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < dr.size(); ++k) worst = std::max(worst, (dr[k] - cp[k]).norm());
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("DR started at its fixed point stops at once") {
  const int n = 8;
  const DualProblem problem(Coupling::power_entropy(n, 1.5, 0.1), Placement::DFB1, 0.5);
  BaselineConfig cfg;
  cfg.gamma = 0.9;
  cfg.tol = 1e-13;
  cfg.max_iter = 5000;
  const BaselineResult sol = dr_solve(problem, cfg);
  REQUIRE(sol.record.converged);
  // x = prox_{gamma phi}(z) exactly when z = x + gamma grad phi(x).
  cfg.z0 = sol.solution + cfg.gamma * grad_phi(sol.solution, problem);
  cfg.tol = 1e-8;
  const BaselineResult again = dr_solve(problem, cfg);
  CHECK(again.record.converged);
  CHECK(again.record.iterations == 1);
}

TEST_CASE("smallest grid") {
  // N = 2 log example: the dual solution is zero, so the forward-backward
  // runs from zero stop after one step; DR and CP agree with each other.
  const HarnessProblem hp{Coupling::log_gomes(2), 0.0};
  for (Algorithm a : {Algorithm::DFB0, Algorithm::DFB1}) {
    const RunRecord r = single_run(hp, a, 1.0, 1e-10, 50);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
  }
  Vector xd, xc;
  const RunRecord dr = single_run(hp, Algorithm::DR, 1.0, 1e-10, 500, {}, nullptr, &xd);
  const RunRecord cp = single_run(hp, Algorithm::CP, 1.0, 1e-10, 500, {}, nullptr, &xc);
  CHECK(dr.converged);
  CHECK(dr.iterations == cp.iterations);
  CHECK(xd.norm() < 1e-8);
  CHECK((xd - xc).norm() < 1e-12);
}

TEST_CASE("harness") {
  const HarnessProblem hp{Coupling::power_entropy(60, 1.5, 0.0), 0.5};
  CHECK_THROWS_AS(harness_run({hp}, {Algorithm::DFB1}, {{}}), ContractError);
  CHECK_THROWS_AS(harness_run({}, {Algorithm::DFB1}, {{0.5}}), ContractError);

  const HarnessResult a = harness_run({hp}, {Algorithm::DFB1}, {{0.5, 0.55, 0.6}});
  REQUIRE(a.best.size() == 1u);
  CHECK(a.runs.size() == 3u);
  CHECK(a.best[0].iterations >= 7);
  CHECK(a.best[0].iterations <= 13);
  const HarnessResult b = harness_run({hp}, {Algorithm::DFB1}, {{0.5, 0.55, 0.6}});
  for (std::size_t k = 0; k < a.runs.size(); ++k) CHECK(a.runs[k].iterations == b.runs[k].iterations);

  const HarnessResult cmp = harness_run({hp}, {Algorithm::CP, Algorithm::DR}, {{1.05}, {1.05}});
  REQUIRE(cmp.runs.size() == 2u);
  CHECK(cmp.runs[0].iterations == cmp.runs[1].iterations);
  CHECK(cmp.runs[1].iterations >= 8);
  CHECK(cmp.runs[1].iterations <= 24);

  std::ostringstream os;
  write_records_csv(os, a.best);
  const std::string text = os.str();
  CHECK(text.rfind("algorithm,time_s,iterations,gamma,nu,epsilon,alpha,n\n", 0) == 0);
  CHECK(text.find("DFB1,") != std::string::npos);
}

TEST_CASE("failed runs are recorded, not thrown") {
  const HarnessProblem hp{Coupling::power_entropy(10, 1.5, 0.0), 0.5};
  const HarnessResult r = harness_run({hp}, {Algorithm::DFB1}, {{0.5, 50.0}});
  REQUIRE(r.runs.size() == 2u);
  CHECK_FALSE(r.runs[1].converged);
  std::ostringstream os;
  write_records_csv(os, r.runs);
  CHECK(os.str().find(",,50,") != std::string::npos);
}

TEST_CASE("unstable steps are abandoned early") {
  const HarnessProblem hp{Coupling::power_entropy(60, 1.5, 0.0), 0.1};
  const HarnessResult r = harness_run({hp}, {Algorithm::DFB1}, {{0.65, 0.7}});
  REQUIRE(r.runs.size() == 2u);
  CHECK(r.runs[0].converged);
  CHECK_FALSE(r.runs[1].converged);
  CHECK(r.runs[1].iterations < 1000);
  REQUIRE(r.best.size() == 1u);
  CHECK(r.best[0].gamma == 0.65);
}

TEST_CASE("algorithm names") {
  for (Algorithm a : {Algorithm::DFB0, Algorithm::DFB1, Algorithm::CP, Algorithm::DR})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS(parse_algorithm("ADMM"));
}
