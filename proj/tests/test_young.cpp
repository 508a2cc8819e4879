#include <doctest.h>

#include <cmath>
#include <random>

#include "ftaplab/young.hpp"
#include "testutil.hpp"

using namespace ftaplab;

namespace {

// Independent conjugation oracle: coarse scan of x*y - F(x) refined by
// golden section.
double conjugate_by_scan(const YoungFunction& F, double y) {
  double best = 0.0, bestx = 0.0;
  double xhi = 1.0;
  while (F.derivative(xhi) < y && xhi < 1e8) xhi *= 2.0;
  xhi *= 2.0;
  for (int i = 0; i <= 4000; ++i) {
    double x = xhi * i / 4000.0;
    double v = x * y - F.value(x);
    if (v > best) {
      best = v;
      bestx = x;
    }
  }
  double lo = std::max(0.0, bestx - xhi / 2000.0), hi = bestx + xhi / 2000.0;
  static const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  while (b - a > 1e-13 * std::max(1.0, b)) {
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    if (x1 * y - F.value(x1) >= x2 * y - F.value(x2)) b = x2;
    else a = x1;
  }
  double xm = 0.5 * (a + b);
  return std::max(best, xm * y - F.value(xm));
}

}  // namespace

TEST_SUITE("orlicz") {

TEST_CASE("conjugate pairs in closed form") {
  auto sq = YoungFunction::power(2.0);
  auto cube = YoungFunction::power(3.0);
  auto expml = YoungFunction::exp_minus_linear();

  auto g_sq = sq.conjugate();
  auto g_cube = cube.conjugate();
  auto g_expml = expml.conjugate();
  for (int i = 0; i <= 100; ++i) {
    double y = 5.0 * i / 100.0;
    CHECK(g_sq.value(y) == doctest::Approx(y * y / 2.0).epsilon(0).scale(1).epsilon(1e-12));
    CHECK(std::abs(g_cube.value(y) - (2.0 / 3.0) * std::pow(y, 1.5)) < 1e-8);
    CHECK(std::abs(g_expml.value(y) - ((1.0 + y) * std::log1p(y) - y)) < 1e-8);
  }
  // entropy conjugates back to exp-minus-linear
  auto back = YoungFunction::entropy().conjugate();
  for (int i = 0; i <= 100; ++i) {
    double x = 3.0 * i / 100.0;
    CHECK(std::abs(back.value(x) - expml.value(x)) < 1e-10);
  }
}

TEST_CASE("conjugate matches the sup-scan oracle") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    auto F = testutil::random_young(rng);
    auto G = F.conjugate();
    for (double y : {0.1, 0.7, 1.3, 2.9}) {
      double ref = conjugate_by_scan(F, y);
      CHECK(std::abs(G.value(y) - ref) < 1e-6);
    }
  }
}

TEST_CASE("involution F** = F") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 16; ++trial) {
    auto F = testutil::random_young(rng);
    auto FF = F.conjugate().conjugate();
    double tol = F.kind() == YoungFunction::Kind::Tabulated ? 1e-4 : 1e-6;
    for (int i = 1; i <= 40; ++i) {
      double x = 4.0 * i / 40.0;
      CHECK(std::abs(FF.value(x) - F.value(x)) < tol);
    }
  }
}

TEST_CASE("monotone ratio F(x)/x strictly increasing") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> d(1e-3, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto F = testutil::random_young(rng);
    double x1 = d(rng), x2 = d(rng);
    if (x1 > x2) std::swap(x1, x2);
    if (x2 - x1 < 1e-6) continue;
    CHECK(F.value(x1) / x1 < F.value(x2) / x2 + 1e-12);
  }
}

TEST_CASE("Fenchel-Young inequality and equality at y = F'(x)") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(0.0, 4.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto F = testutil::random_young(rng);
    auto G = F.conjugate();
    double x = d(rng), y = d(rng);
    CHECK(x * y <= F.value(x) + G.value(y) + 1e-8);
    double ystar = F.derivative(x);
    CHECK(std::abs(x * ystar - (F.value(x) + G.value(ystar))) < 1e-6);
  }
}

TEST_CASE("young function text records round-trip") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto F = testutil::random_young(rng);
    auto back = YoungFunction::from_text(F.to_text());
    for (double x : {0.3, 1.1, 2.7}) CHECK(back.value(x) == doctest::Approx(F.value(x)).epsilon(1e-9));
  }
  CHECK(YoungFunction::from_text("power p=2").value(3.0) == doctest::Approx(4.5));
  CHECK(YoungFunction::from_text("expml").value(1.0) == doctest::Approx(std::exp(1.0) - 2.0));
  CHECK(YoungFunction::from_text("entropy").value(0.0) == 0.0);
  auto tab = YoungFunction::from_text("tab knots=[(0,0),(1,2),(2,5)] tail=2");
  CHECK(tab.derivative(1.0) == doctest::Approx(2.0));
}

TEST_CASE("tabulated validation rejects bad samples") {
  CHECK_THROWS_AS(YoungFunction::tabulated({{0.0, 0.0}, {1.0, 0.0}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(YoungFunction::tabulated({{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}}, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(YoungFunction::tabulated({{0.5, 0.1}, {1.0, 2.0}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(YoungFunction::tabulated({{0.0, 0.0}, {1.0, 2.0}}, 1.0), std::invalid_argument);
}

TEST_CASE("ui_tail_bound values and brute force") {
  auto F = YoungFunction::power(2.0);
  CHECK(ui_tail_bound(F, 4.0) == doctest::Approx(0.5));
  CHECK(ui_tail_bound(F, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ui_tail_bound(F, 0.0), std::domain_error);

  // Ball-boundary densities on a 3-atom space never beat the bound.
  std::mt19937 rng(29);
  FiniteProbSpace space({0.2, 0.3, 0.5});
  std::uniform_real_distribution<double> d(0.1, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto G = testutil::random_young(rng);
    std::vector<double> h{d(rng), d(rng), d(rng)};
    // scale to the modular boundary E[G(|h|)] = 1
    double lo = 1e-6, hi = 1.0;
    auto modular = [&](double s) {
      double m = 0.0;
      for (std::size_t i = 0; i < 3; ++i) m += space.prob(i) * G.value(s * h[i]);
      return m;
    };
    while (modular(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 90; ++it) {
      double mid = 0.5 * (lo + hi);
      (modular(mid) < 1.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (double kappa : {0.5, 1.0, 2.0}) {
      double tail = 0.0;
      for (std::size_t i = 0; i < 3; ++i)
        if (s * h[i] >= kappa) tail += space.prob(i) * s * h[i];
      CHECK(tail <= ui_tail_bound(G, kappa) + 1e-9);
    }
  }
}

}  // TEST_SUITE
