#include "ftaplab/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftaplab {

namespace {

constexpr double kBisectTol = 1e-10;
constexpr int kBisectMaxIter = 200;

double modular(const std::vector<double>& f, const FiniteProbSpace& space, const YoungFunction& F,
               double a) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double v = F.value(std::abs(f[i]) / a);
    if (std::isinf(v)) return v;
    s += space.prob(i) * v;
  }
  return s;
}

}  // namespace

double luxemburg_norm(const std::vector<double>& f, const FiniteProbSpace& space,
                      const YoungFunction& F) {
  space.require_length(f);
  double fmax = 0.0;
  for (double v : f) {
    if (!std::isfinite(v)) throw std::invalid_argument("luxemburg_norm needs finite values");
    fmax = std::max(fmax, std::abs(v));
  }
  if (fmax == 0.0) return 0.0;

  double hi = fmax;
  for (int i = 0; i < kBisectMaxIter && modular(f, space, F, hi) > 1.0; ++i) hi *= 2.0;
  double lo = hi;
  for (int i = 0; i < kBisectMaxIter && modular(f, space, F, lo * 0.5) <= 1.0; ++i) lo *= 0.5;
  lo *= 0.5;
  for (int i = 0; i < kBisectMaxIter && hi - lo > kBisectTol * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (modular(f, space, F, mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

GaugeWitness polar_gauge_witness(const std::vector<double>& g, const FiniteProbSpace& space,
                                 const YoungFunction& F) {
  space.require_length(g);
  double gmax = 0.0;
  for (double v : g) {
    if (!std::isfinite(v)) throw std::invalid_argument("polar_gauge needs finite values");
    gmax = std::max(gmax, std::abs(v));
  }
  GaugeWitness out;
  out.h.assign(g.size(), 0.0);
  if (gmax == 0.0) return out;

  auto ball_mass = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double h = F.derivative_inverse(std::abs(g[i]) / lambda);
      double v = F.value(h);
      if (std::isinf(v)) return v;
      s += space.prob(i) * v;
    }
    return s;
  };

  // E[F(h)] = 1 at the optimum; the mass is decreasing in lambda.
  double hi = gmax;
  for (int i = 0; i < kBisectMaxIter && ball_mass(hi) > 1.0; ++i) hi *= 2.0;
  double lo = hi;
  for (int i = 0; i < kBisectMaxIter && ball_mass(lo * 0.5) <= 1.0; ++i) lo *= 0.5;
  lo *= 0.5;
  for (int i = 0; i < kBisectMaxIter && hi - lo > kBisectTol * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (ball_mass(mid) <= 1.0 ? hi : lo) = mid;
  }
  double lambda = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double h = F.derivative_inverse(std::abs(g[i]) / lambda);
    out.h[i] = g[i] >= 0.0 ? h : -h;
    out.value += space.prob(i) * std::abs(g[i]) * h;
  }
  return out;
}

double polar_gauge(const std::vector<double>& g, const FiniteProbSpace& space,
                   const YoungFunction& F) {
  return polar_gauge_witness(g, space, F).value;
}

UtilityFunction UtilityFunction::from_young(YoungFunction F) {
  UtilityFunction u;
  u.young_ = std::move(F);
  return u;
}

UtilityFunction UtilityFunction::piecewise(std::vector<double> breakpoints,
                                           std::vector<double> slopes) {
  if (slopes.size() != breakpoints.size() + 1)
    throw std::invalid_argument("piecewise utility needs slopes.size() == breakpoints.size()+1");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("piecewise breakpoints must be strictly increasing");
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (!(slopes[i] >= 0.0)) throw std::invalid_argument("piecewise utility must be nondecreasing");
    if (i > 0 && slopes[i] > slopes[i - 1] + 1e-15)
      throw std::invalid_argument("piecewise utility must be concave (slopes nonincreasing)");
  }
  UtilityFunction u;
  u.breaks_ = std::move(breakpoints);
  u.slopes_ = std::move(slopes);
  // Anchor u(0)=0 by integrating slopes outward from 0.
  u.values_at_breaks_.assign(u.breaks_.size(), 0.0);
  if (!u.breaks_.empty()) {
    std::size_t k0 = 0;
    while (k0 < u.breaks_.size() && u.breaks_[k0] < 0.0) ++k0;
    // Value at break k0-1 (last negative break) moving left, and k0 moving right.
    if (k0 < u.breaks_.size()) {
      double x = 0.0, v = 0.0;
      for (std::size_t k = k0; k < u.breaks_.size(); ++k) {
        v += u.slopes_[k] * (u.breaks_[k] - x);
        x = u.breaks_[k];
        u.values_at_breaks_[k] = v;
      }
    }
    if (k0 > 0) {
      double x = 0.0, v = 0.0;
      for (std::size_t k = k0; k-- > 0;) {
        v -= u.slopes_[k + 1] * (x - u.breaks_[k]);
        x = u.breaks_[k];
        u.values_at_breaks_[k] = v;
      }
    }
  }
  return u;
}

const YoungFunction& UtilityFunction::young() const {
  if (!young_) throw std::logic_error("utility is not of u_F form");
  return *young_;
}

double UtilityFunction::value(double x) const {
  if (young_) return x >= 0.0 ? 0.0 : -young_->value(-x);
  if (breaks_.empty()) return slopes_[0] * x;
  std::size_t k = 0;
  while (k < breaks_.size() && breaks_[k] <= x) ++k;
  // segment k: between breaks_[k-1] (or -inf) and breaks_[k] (or +inf)
  if (k == 0) return values_at_breaks_[0] + slopes_[0] * (x - breaks_[0]);
  return values_at_breaks_[k - 1] + slopes_[k] * (x - breaks_[k - 1]);
}

double UtilityFunction::super_derivative(double x) const {
  if (young_) return x >= 0.0 ? 0.0 : young_->derivative(-x);
  std::size_t k = 0;
  while (k < breaks_.size() && breaks_[k] <= x) ++k;
  return slopes_[k];
}

double UtilityFunction::max_slope_hint() const {
  if (young_) return young_->derivative(1e6);
  return slopes_.front();
}

double UtilityFunction::leftmost_breakpoint() const {
  if (young_ || breaks_.empty()) return 0.0;
  return breaks_.front();
}

UtilityFunction utility_from_young(const YoungFunction& F) {
  return UtilityFunction::from_young(F);
}

YoungFunction conjugate_utility(const UtilityFunction& u) {
  if (!u.is_from_young())
    throw std::invalid_argument(
        "conjugate_utility supports u_F utilities only; apply young_minorant first");
  return u.young().conjugate();
}

YoungFunction young_minorant(const UtilityFunction& u, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("young_minorant needs eps > 0");
  if (u.is_from_young()) return u.young();

  // Largest delta with u(-delta) >= -eps (u(-x) is nonincreasing in x).
  const double kDeltaCap = 1e6;
  double delta;
  if (u.value(-kDeltaCap) >= -eps) {
    delta = kDeltaCap;
  } else {
    double lo = 0.0, hi = kDeltaCap;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
      double mid = 0.5 * (lo + hi);
      (u.value(-mid) >= -eps ? lo : hi) = mid;
    }
    delta = lo;
    if (delta <= 0.0) delta = 1e-12;
  }

  const double smax = u.max_slope_hint();
  const double xfar = std::max({4.0 * delta, 16.0, -4.0 * u.leftmost_breakpoint()});
  for (int p = 2; p <= 40; ++p) {
    double pd = static_cast<double>(p);
    // Coefficient keeping F(delta) = eps when that suffices, raised to the
    // level the domination F(y) >= -u(-y) - eps demands on (delta, inf).
    double logc1 = std::log(eps) - pd * std::log(delta);
    double c = logc1 > -700.0 ? std::exp(logc1) : 1e-300;
    for (int k = 0; k <= 400; ++k) {
      double y = delta * std::pow(xfar / delta, k / 400.0);
      double need = -u.value(-y) - eps;
      if (need > 0.0) c = std::max(c, need / std::pow(y, pd) * (1.0 + 1e-9));
    }
    // Beyond xfar, -u(-y) grows at slope <= smax; a convex F dominating at
    // xfar with F'(xfar) >= smax dominates everywhere to the right.
    if (c * pd * std::pow(xfar, pd - 1.0) < smax) continue;
    YoungFunction candidate = YoungFunction::power(pd, c);
    bool ok = candidate.value(xfar) >= -u.value(-xfar) - eps;
    for (int k = 0; ok && k <= 2000; ++k) {
      double x = xfar * k / 2000.0;
      if (-candidate.value(x) - eps > u.value(-x) + 1e-12) ok = false;
    }
    if (ok) return candidate;
  }
  throw std::runtime_error("young_minorant: no power-family minorant found");
}

}  // namespace ftaplab
