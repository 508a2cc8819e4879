#include <doctest.h>

#include <cmath>
#include <random>

#include "ftaplab/orlicz.hpp"
#include "testutil.hpp"

using namespace ftaplab;

TEST_SUITE("orlicz") {

TEST_CASE("luxemburg norm pinned values") {
  auto F = YoungFunction::power(2.0);
  FiniteProbSpace half({0.5, 0.5});
  CHECK(luxemburg_norm({0.0, 0.0}, half, F) == 0.0);
  CHECK(luxemburg_norm({1.0, 1.0}, half, F) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(luxemburg_norm({2.0, 0.0}, half, F) == doctest::Approx(1.0).epsilon(1e-9));
  FiniteProbSpace tri({0.2, 0.3, 0.5});
  CHECK(luxemburg_norm({1.0, 1.0, 1.0}, tri, F) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("luxemburg norm scaling and zero detection") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto space = testutil::random_space(rng);
    auto F = testutil::random_young(rng);
    auto f = testutil::random_vector(rng, space.size(), -3.0, 3.0);
    double c = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    double base = luxemburg_norm(f, space, F);
    auto cf = f;
    for (auto& v : cf) v *= c;
    CHECK(std::abs(luxemburg_norm(cf, space, F) - c * base) < 1e-8 * std::max(1.0, c * base));
  }
}

TEST_CASE("polar gauge pinned values and the exact factor-2 case") {
  auto F = YoungFunction::power(2.0);
  FiniteProbSpace half({0.5, 0.5});
  CHECK(polar_gauge({0.0, 0.0}, half, F) == 0.0);
  double gauge = polar_gauge({1.0, 1.0}, half, F);
  CHECK(gauge == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  double norm = luxemburg_norm({1.0, 1.0}, half, F.conjugate());
  CHECK(std::abs(gauge - 2.0 * norm) < 1e-9);
}

TEST_CASE("polar sandwich |g|_G <= gauge <= 2|g|_G") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    auto space = testutil::random_space(rng);
    auto F = testutil::random_young(rng);
    auto G = F.conjugate();
    auto g = testutil::random_vector(rng, space.size(), -2.0, 2.0);
    double gauge = polar_gauge(g, space, F);
    double norm = luxemburg_norm(g, space, G);
    CHECK(gauge >= norm - 1e-8);
    CHECK(gauge <= 2.0 * norm + 1e-8);
  }
}

TEST_CASE("Hoelder with factor 2") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    auto space = testutil::random_space(rng);
    auto F = testutil::random_young(rng);
    auto G = F.conjugate();
    auto f = testutil::random_vector(rng, space.size(), -3.0, 3.0);
    auto g = testutil::random_vector(rng, space.size(), -3.0, 3.0);
    double e = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) e += space.prob(i) * std::abs(f[i] * g[i]);
    CHECK(e <= 2.0 * luxemburg_norm(f, space, F) * luxemburg_norm(g, space, G) + 1e-9);
  }
}

TEST_CASE("utility bridge u_F") {
  auto F = YoungFunction::power(2.0);
  auto u = utility_from_young(F);
  CHECK(u.value(-1.0) == doctest::Approx(-0.5));
  CHECK(u.value(0.0) == 0.0);
  CHECK(u.value(3.7) == 0.0);
  auto u3 = utility_from_young(YoungFunction::power(3.0));
  CHECK(u3.value(-2.0) == doctest::Approx(-8.0 / 3.0));
}

TEST_CASE("conjugate_utility equals the complementary function") {
  auto F = YoungFunction::power(2.0);
  auto v = conjugate_utility(utility_from_young(F));
  for (int i = 0; i <= 100; ++i) {
    double y = 4.0 * i / 100.0;
    CHECK(std::abs(v.value(y) - y * y / 2.0) < 1e-10);
    CHECK(v.value(y) >= 0.0);  // v(y) >= u(0) = 0
  }
  // independent sup over an x-grid
  std::mt19937 rng(43);
  auto Fr = testutil::random_young(rng);
  auto vr = conjugate_utility(utility_from_young(Fr));
  auto u = utility_from_young(Fr);
  for (int i = 0; i <= 100; ++i) {
    double y = 3.0 * i / 100.0;
    double ref = 0.0;
    for (int k = 0; k <= 60000; ++k) {
      double x = -30.0 + 30.0 * k / 60000.0;
      ref = std::max(ref, u.value(x) - x * y);
    }
    CHECK(vr.value(y) >= ref - 1e-8);
    CHECK(std::abs(vr.value(y) - ref) < 2e-4);  // grid resolution limits the oracle
  }
  CHECK_THROWS_AS(conjugate_utility(UtilityFunction::piecewise({0.0}, {1.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("young_minorant constructions verify on a grid") {
  // linear utility
  auto u_lin = UtilityFunction::piecewise({}, {1.0});
  auto F1 = young_minorant(u_lin, 0.01);
  for (int i = 0; i <= 2000; ++i) {
    double x = -10.0 * i / 2000.0;
    CHECK(-F1.value(-x) - 0.01 <= u_lin.value(x) + 1e-10);
  }
  // the spec's hand example for the same utility
  for (int i = 0; i <= 2000; ++i) {
    double y = 10.0 * i / 2000.0;
    CHECK(y - 0.01 <= y * y / 0.04 + 1e-12);
  }
  // kinked utility min(x, 0)
  auto u_kink = UtilityFunction::piecewise({0.0}, {1.0, 0.0});
  auto F2 = young_minorant(u_kink, 0.01);
  for (int i = 0; i <= 2000; ++i) {
    double x = -10.0 * i / 2000.0;
    CHECK(-F2.value(-x) - 0.01 <= u_kink.value(x) + 1e-10);
  }
  // identity case
  auto F = YoungFunction::power(3.0);
  auto back = young_minorant(utility_from_young(F), 0.5);
  CHECK(back.to_text() == F.to_text());
  CHECK_THROWS_AS(young_minorant(u_lin, 0.0), std::domain_error);
}

TEST_CASE("young_minorant on random piecewise utilities") {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  std::uniform_real_distribution<double> gap(0.2, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    int kinks = std::uniform_int_distribution<int>(0, 3)(rng);
    std::vector<double> breaks, slopes;
    double x = -3.0;
    for (int i = 0; i < kinks; ++i) {
      breaks.push_back(x);
      x += gap(rng);
    }
    std::vector<double> raw(static_cast<std::size_t>(kinks + 1));
    for (auto& s : raw) s = slope(rng);
    std::sort(raw.rbegin(), raw.rend());
    auto u = UtilityFunction::piecewise(breaks, raw);
    double eps = std::uniform_real_distribution<double>(0.005, 0.3)(rng);
    auto Fm = young_minorant(u, eps);
    for (int i = 0; i <= 400; ++i) {
      double xx = -40.0 * i / 400.0;
      CHECK(-Fm.value(-xx) - eps <= u.value(xx) + 1e-9);
    }
  }
}

}  // TEST_SUITE
