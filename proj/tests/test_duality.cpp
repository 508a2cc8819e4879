#include <doctest.h>

#include <cmath>
#include <random>

#include "ftaplab/duality.hpp"
#include "testutil.hpp"

using namespace ftaplab;

namespace {

FiniteMarket symmetric_market() { return make_single_period({0.5, 0.5}, {1.0, -1.0}); }

UtilityProblem sym_problem(std::vector<double> w) {
  auto m = symmetric_market();
  auto space = m.leaf_space();
  return UtilityProblem{m, utility_from_young(YoungFunction::power(2.0)),
                        DensityVector::ones(space), std::move(w)};
}

// Dense scan over strategy coordinates; independent of the ascent path.
double primal_grid_oracle(const UtilityProblem& prob, double radius, int steps) {
  auto basis = gains_basis(prob.market);
  REQUIRE(basis.num_columns() == 1);
  auto rmeas = prob.belief_measure();
  double best = -1e18;
  for (int i = 0; i <= steps; ++i) {
    double xi = -radius + 2.0 * radius * i / steps;
    auto f = basis.apply({xi});
    double v = 0.0;
    for (std::size_t l = 0; l < f.size(); ++l)
      v += rmeas[l] * prob.u.value(f[l] - prob.endowment_shift[l]);
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

TEST_SUITE("duality") {

TEST_CASE("primal pinned values") {
  // w = 0 on a market with an EMM: the supremum is u(+inf) boundary 0
  auto p0 = sup_utility_primal(sym_problem({0.0, 0.0}));
  CHECK(p0.value == doctest::Approx(0.0).epsilon(1e-9));

  // w = 1_{leaf1}: hand-optimized value -1/8 at xi = 1/2
  auto p1 = sup_utility_primal(sym_problem({1.0, 0.0}));
  CHECK(p1.value == doctest::Approx(-0.125).epsilon(1e-8));
  CHECK(primal_grid_oracle(sym_problem({1.0, 0.0}), 2.0, 4000) == doctest::Approx(-0.125).epsilon(1e-6));

  // the one-period arbitrage market with w equal to its own payoff
  auto klein = make_single_period({0.3, 0.7}, {1.0, 0.0});
  UtilityProblem kp{klein, utility_from_young(YoungFunction::power(2.0)),
                    DensityVector::ones(klein.leaf_space()), {1.0, 0.0}};
  CHECK(sup_utility_primal(kp).value >= -1e-10);
}

TEST_CASE("dual pinned example Q=(1/2,1/2), lambda=1/2, value -1/8") {
  auto dual = sup_utility_dual(sym_problem({1.0, 0.0}));
  REQUIRE(dual.attained);
  CHECK(dual.value == doctest::Approx(-0.125).epsilon(1e-7));
  CHECK(dual.q[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(dual.q[1] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(dual.lambda == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(dual.gap) <= 1e-6);
}

TEST_CASE("dual with w = 0 reports a non-attained infimum") {
  auto dual = sup_utility_dual(sym_problem({0.0, 0.0}));
  CHECK_FALSE(dual.attained);
  CHECK(dual.value == doctest::Approx(0.0));
  CHECK(!dual.warning.empty());
}

TEST_CASE("weak duality on sampled feasible pairs") {
  auto prob = sym_problem({1.0, 0.0});
  double primal = sup_utility_primal(prob).value;
  auto v = YoungFunction::power(2.0).conjugate();
  std::mt19937 rng(83);
  std::uniform_real_distribution<double> lam(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    double l = lam(rng);
    // the unique martingale measure (1/2, 1/2); dQ/dR = (1, 1)
    double obj = -l * 0.5 + v.value(l);
    CHECK(obj >= primal - 1e-9);
  }
}

TEST_CASE("strong duality on random verified instances") {
  std::mt19937 rng(89);
  std::vector<YoungFunction> fams{YoungFunction::power(2.0), YoungFunction::power(3.0),
                                  YoungFunction::exp_minus_linear()};
  int done = 0;
  while (done < 30) {
    auto m = testutil::random_market(rng, 2, 6, 1);
    if (!find_emm(m).found) continue;
    const auto& F = fams[static_cast<std::size_t>(done) % fams.size()];
    std::vector<double> w(m.num_leaves(), 0.0);
    std::uniform_int_distribution<std::size_t> pick(0, m.num_leaves() - 1);
    w[pick(rng)] = 1.0;
    UtilityProblem prob{m, utility_from_young(F), DensityVector::ones(m.leaf_space()), w};
    auto primal = sup_utility_primal(prob);
    if (primal.value >= -1e-3) continue;
    auto dual = sup_utility_dual(prob);
    REQUIRE(dual.attained);
    CHECK(std::abs(dual.value - dual.primal_value) <= 1e-6);
    CHECK(dual.value >= dual.primal_value - 1e-9);
    ++done;
  }
}

TEST_CASE("lambda_bracket pinned values") {
  auto br = lambda_bracket(YoungFunction::power(2.0), 0.1);
  CHECK(br.lambda0 == doctest::Approx(0.1));
  CHECK(br.lambda1 == doctest::Approx(1.0 + std::sqrt(0.8)).epsilon(1e-9));

  for (double delta : {0.01, 0.05, 0.2}) {
    auto b2 = lambda_bracket(YoungFunction::exp_minus_linear(), delta);
    CHECK(b2.lambda0 == doctest::Approx(delta));
    auto v = YoungFunction::exp_minus_linear().conjugate();
    CHECK(v.value(b2.lambda1) - b2.lambda1 == doctest::Approx(-delta).epsilon(1e-7));
  }
  CHECK_THROWS_AS(lambda_bracket(YoungFunction::power(2.0), 0.0), std::domain_error);
  CHECK_THROWS_AS(lambda_bracket(YoungFunction::power(2.0), 0.9), std::domain_error);

  // the dual optimizer of the -1/8 example sits inside the bracket for delta = 0.1
  auto dual = sup_utility_dual(sym_problem({1.0, 0.0}));
  CHECK(dual.lambda >= br.lambda0 - 1e-9);
  CHECK(dual.lambda <= br.lambda1 + 1e-9);
}

TEST_CASE("Jensen step of the lambda bound") {
  // -lambda + v(lambda) <= dual objective at (Q, lambda) for w = 1_A
  std::mt19937 rng(97);
  auto v = YoungFunction::power(2.0).conjugate();
  for (int trial = 0; trial < 100; ++trial) {
    auto m = testutil::random_market(rng, 2, 6, 1);
    auto emm = find_emm(m);
    if (!emm.found) continue;
    std::vector<double> w(m.num_leaves(), 0.0);
    w[0] = 1.0;
    double lambda = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
    double obj = 0.0;
    for (std::size_t l = 0; l < m.num_leaves(); ++l) {
      double p = m.leaf_space().prob(l);
      double rho = emm.q[l] / p;
      obj += p * (-lambda * rho * w[l] + v.value(lambda * rho));
    }
    CHECK(-lambda + v.value(lambda) <= obj + 1e-9);
  }
}

TEST_CASE("separating_from_set certifies the set mass and ball bound") {
  auto m = symmetric_market();
  auto R = DensityVector::ones(m.leaf_space());
  auto F = YoungFunction::power(2.0);
  auto res = separating_from_set(m, R, {0}, F, 0.1);
  CHECK(res.gamma == doctest::Approx(0.1 / (1.0 + std::sqrt(0.8))).epsilon(1e-8));
  CHECK(res.q_mass_on_set == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.q_mass_on_set > res.gamma);
  // E_R[v(delta dQ/dR)]/(lambda1 - delta) with v = y^2/2: 0.005 / 1.7944
  CHECK(res.ball_bound == doctest::Approx(0.005 / (1.0 + std::sqrt(0.8) - 0.1)).epsilon(1e-6));
  CHECK(res.ball_bound <= 1.0);

  // empty set means w = 0 and the precondition fails
  CHECK_THROWS_AS(separating_from_set(m, R, {}, F, 0.1), MarketFreeLunchSignal);
}

}  // TEST_SUITE
