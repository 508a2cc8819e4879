#include <doctest.h>

#include <cmath>
#include <random>

#include "ftaplab/convex.hpp"
#include "ftaplab/linprog.hpp"
#include "ftaplab/linprog_exact.hpp"
#include "testutil.hpp"

using namespace ftaplab;

TEST_SUITE("convexsolve") {

TEST_CASE("lp_solve basics") {
  LinearProgram lp;
  lp.maximize = true;
  lp.objective = {1.0};
  lp.lower = {0.0};
  lp.upper = {LinearProgram::inf()};
  lp.add_ineq({1.0}, 1.0);
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));

  LinearProgram bad;
  bad.objective = {0.0};
  bad.lower = {1.0};
  bad.upper = {0.0};
  CHECK(lp_solve(bad).status == LpStatus::Infeasible);

  LinearProgram infeasible;
  infeasible.objective = {1.0};
  infeasible.add_ineq({-1.0}, -1.0);  // x >= 1
  infeasible.add_ineq({1.0}, 0.0);    // x <= 0
  CHECK(lp_solve(infeasible).status == LpStatus::Infeasible);

  LinearProgram unbounded;
  unbounded.maximize = true;
  unbounded.objective = {1.0};
  unbounded.lower = {0.0};
  CHECK(lp_solve(unbounded).status == LpStatus::Unbounded);
}

TEST_CASE("two-state martingale measure from the LP") {
  // q solves 2q - (1-q) = 0 with q1 + q2 = 1, q >= 0
  LinearProgram lp;
  lp.objective = {0.0, 0.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {1.0, 1.0};
  lp.add_eq({1.0, 1.0}, 1.0);
  lp.add_eq({2.0, -1.0}, 0.0);
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0 / 3.0));
  CHECK(sol.x[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("lp duality against an explicit dual and a vertex oracle") {
  std::mt19937 rng(53);
  std::uniform_int_distribution<int> nd(2, 4), md(2, 5);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = nd(rng), m = md(rng);
    // primal: min c'x  s.t.  A x >= b, 0 <= x <= 50   (c, A >= 0, b >= 0)
    std::vector<std::vector<double>> A(static_cast<std::size_t>(m));
    std::vector<double> b(static_cast<std::size_t>(m)), c(static_cast<std::size_t>(n));
    for (auto& v : c) v = coef(rng);
    for (int i = 0; i < m; ++i) {
      A[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
      for (auto& v : A[static_cast<std::size_t>(i)]) v = coef(rng);
      b[static_cast<std::size_t>(i)] = coef(rng);
    }
    LinearProgram primal;
    primal.objective = c;
    primal.lower.assign(static_cast<std::size_t>(n), 0.0);
    primal.upper.assign(static_cast<std::size_t>(n), 50.0);
    for (int i = 0; i < m; ++i) {
      auto row = A[static_cast<std::size_t>(i)];
      for (auto& v : row) v = -v;
      primal.add_ineq(std::move(row), -b[static_cast<std::size_t>(i)]);
    }
    auto psol = lp_solve(primal);
    REQUIRE(psol.status == LpStatus::Optimal);

    // dual: max b'y  s.t.  A'y <= c, y >= 0 (the x <= 50 box is slack at the optimum)
    LinearProgram dual;
    dual.maximize = true;
    dual.objective = b;
    dual.lower.assign(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < n; ++j) {
      std::vector<double> row(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) row[static_cast<std::size_t>(i)] = A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      dual.add_ineq(std::move(row), c[static_cast<std::size_t>(j)]);
    }
    auto dsol = lp_solve(dual);
    REQUIRE(dsol.status == LpStatus::Optimal);
    CHECK(std::abs(psol.objective - dsol.objective) < 1e-8 * std::max(1.0, std::abs(psol.objective)));

    if (n <= 4) {
      auto oracle = testutil::lp_vertex_oracle(primal);
      REQUIRE(oracle.has_value());
      CHECK(std::abs(*oracle - psol.objective) < 1e-7 * std::max(1.0, std::abs(*oracle)));
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("exact rational solve agrees with the float solve") {
  LinearProgram lp;
  lp.maximize = true;
  lp.objective = {3.0, 5.0};
  lp.lower = {0.0, 0.0};
  lp.add_ineq({1.0, 0.0}, 4.0);
  lp.add_ineq({0.0, 2.0}, 12.0);
  lp.add_ineq({3.0, 2.0}, 18.0);
  auto fsol = lp_solve(lp);
  auto esol = lp_solve_exact(lp);
  REQUIRE(fsol.status == LpStatus::Optimal);
  REQUIRE(esol.status == LpStatus::Optimal);
  CHECK(esol.objective == Rational(36));
  CHECK(esol.x[0] == Rational(2));
  CHECK(esol.x[1] == Rational(6));
  CHECK(std::abs(fsol.objective - 36.0) < 1e-9);
}

TEST_CASE("min_convex_1d pinned examples") {
  auto [x1, v1] = min_convex_1d([](double l) { return -l / 2.0 + l * l / 2.0; }, 0.0, 10.0);
  CHECK(x1 == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(v1 == doctest::Approx(-0.125).epsilon(1e-10));
  auto [x2, v2] = min_convex_1d([](double l) { return l * l; }, -1.0, 1.0);
  CHECK(std::abs(x2) < 1e-8);
  CHECK(v2 == doctest::Approx(0.0));
  auto [x3, v3] = min_convex_1d([](double l) { return std::abs(l - 2.0); }, 0.0, 10.0);
  CHECK(x3 == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(v3 == doctest::Approx(0.0));
  CHECK_THROWS_AS(min_convex_1d([](double) { return 0.0; }, 1.0, 1.0), std::domain_error);
}

TEST_CASE("knap_min pinned examples") {
  FiniteProbSpace third({1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto r1 = knap_min({3.0, 1.0, 2.0}, ConstrainedClaimSet(1.0 / 3, third));
  CHECK(r1.value == doctest::Approx(1.0));
  CHECK(r1.w[0] == doctest::Approx(0.0));
  CHECK(r1.w[1] == doctest::Approx(1.0));
  CHECK(r1.w[2] == doctest::Approx(0.0));

  auto r2 = knap_min({3.0, 1.0, 2.0}, ConstrainedClaimSet(1.0, third));
  CHECK(r2.value == doctest::Approx(6.0));
  for (double wi : r2.w) CHECK(wi == doctest::Approx(1.0));

  FiniteProbSpace half({0.5, 0.5});
  auto r3 = knap_min({2.0, 2.0}, ConstrainedClaimSet(0.5, half));
  CHECK(r3.value == doctest::Approx(1.0));  // c * eps with c = 2

  CHECK_THROWS(knap_min({1.0, 1.0}, ConstrainedClaimSet(1.5, half)));
  CHECK_THROWS_AS(knap_min({-1.0, 1.0}, ConstrainedClaimSet(0.5, half)), std::invalid_argument);
}

TEST_CASE("knap_min equals brute force over claim-set vertices") {
  std::mt19937 rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    auto space = testutil::random_space(rng, 2, 10);
    auto z = testutil::random_vector(rng, space.size(), 0.0, 3.0);
    double eps = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    auto got = knap_min(z, ConstrainedClaimSet(eps, space));
    double ref = testutil::extremal_vertex_oracle(z, [&] {
      std::vector<double> scaled(space.size());
      for (std::size_t i = 0; i < space.size(); ++i) scaled[i] = space.prob(i);
      return scaled;
    }(), eps);
    CHECK(std::abs(got.value - ref) < 1e-10);
    CHECK(ConstrainedClaimSet(eps, space).contains(got.w));
  }
}

TEST_CASE("min_over_cone examples") {
  // single density, objective E[z^2]: infimum 0 at the apex, not attained
  FiniteProbSpace half({0.5, 0.5});
  ConeObjective sq;
  sq.value = [&](const std::vector<double>& z) {
    return 0.5 * (z[0] * z[0] + z[1] * z[1]);
  };
  sq.subgradient = [&](const std::vector<double>& z) {
    return std::vector<double>{z[0], z[1]};
  };
  auto r1 = min_over_cone(sq, {{1.0, 1.0}});
  CHECK(r1.value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_FALSE(r1.attained);

  // single-point cone {lambda * 1}: -lambda/2 + lambda^2/2
  ConeObjective quad;
  quad.value = [](const std::vector<double>& z) { return -z[0] / 2.0 + z[0] * z[0] / 2.0; };
  quad.subgradient = [](const std::vector<double>& z) {
    return std::vector<double>{-0.5 + z[0]};
  };
  auto r2 = min_over_cone(quad, {{1.0}});
  CHECK(r2.value == doctest::Approx(-0.125).epsilon(1e-7));
  CHECK(r2.point[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r2.attained);

  auto empty = min_over_cone(quad, {});
  CHECK(empty.status == ConeStatus::EmptyBasis);

  // unbounded direction
  ConeObjective lin;
  lin.value = [](const std::vector<double>& z) { return -z[0]; };
  lin.subgradient = [](const std::vector<double>&) { return std::vector<double>{-1.0}; };
  auto r3 = min_over_cone(lin, {{1.0}});
  CHECK(r3.status == ConeStatus::Unbounded);
}

TEST_CASE("min_over_cone lower bound is sound") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = testutil::random_space(rng, 2, 5);
    auto w = testutil::random_vector(rng, space.size(), 0.0, 1.0);
    ConeObjective obj;
    obj.value = [&, w](const std::vector<double>& z) {
      double s = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i)
        s += space.prob(i) * (-z[i] * w[i] + z[i] * z[i] / 2.0);
      return s;
    };
    obj.subgradient = [&, w](const std::vector<double>& z) {
      std::vector<double> g(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) g[i] = space.prob(i) * (-w[i] + z[i]);
      return g;
    };
    std::vector<std::vector<double>> basis;
    int K = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < K; ++k) basis.push_back(testutil::random_vector(rng, space.size(), 0.0, 2.0));
    auto res = min_over_cone(obj, basis);
    CHECK(res.lower_bound <= res.value + 1e-12);
    // the certified bound undercuts every feasible evaluation
    std::uniform_real_distribution<double> mu(0.0, 3.0);
    for (int s = 0; s < 50; ++s) {
      std::vector<double> z(space.size(), 0.0);
      for (const auto& d : basis) {
        double m = mu(rng);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += m * d[i];
      }
      CHECK(obj.value(z) >= res.lower_bound - 1e-9);
    }
  }
}

}  // TEST_SUITE
