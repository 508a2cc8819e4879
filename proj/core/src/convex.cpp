#include "ftaplab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ftaplab/linprog.hpp"

namespace ftaplab {

std::pair<double, double> min_convex_1d(const std::function<double(double)>& phi, double lo,
                                        double hi) {
  if (!(lo < hi)) throw std::domain_error("min_convex_1d needs lo < hi");
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  while (b - a > 1e-10) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = phi(x2);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = phi(xm);
  // keep the best of the evaluated points
  if (f1 < fm) {
    fm = f1;
    xm = x1;
  }
  if (f2 < fm) {
    fm = f2;
    xm = x2;
  }
  return {xm, fm};
}

bool ConstrainedClaimSet::contains(const std::vector<double>& w, double tol) const {
  space_.require_length(w);
  for (double v : w)
    if (v < -tol || v > 1.0 + tol) return false;
  return space_.expectation(w) >= eps_ - tol;
}

namespace detail {

KnapResult linear_min_over_claims(const std::vector<double>& z,
                                  const ConstrainedClaimSet& claims) {
  const auto& space = claims.space();
  space.require_length(z);
  if (claims.empty()) throw std::domain_error("claim set is empty (eps > 1)");

  KnapResult res;
  res.w.assign(z.size(), 0.0);
  double mass = 0.0;
  // Negative coefficients reduce the objective at no cost.
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0.0) {
      res.w[i] = 1.0;
      res.value += z[i];
      mass += space.prob(i);
    }
  }
  if (mass >= claims.eps()) return res;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] >= 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return z[a] / space.prob(a) < z[b] / space.prob(b);
  });
  for (std::size_t i : order) {
    double need = claims.eps() - mass;
    if (need <= 0.0) break;
    double take = std::min(1.0, need / space.prob(i));
    res.w[i] = take;
    res.value += z[i] * take;
    mass += space.prob(i) * take;
  }
  return res;
}

}  // namespace detail

KnapResult knap_min(const std::vector<double>& z, const ConstrainedClaimSet& claims) {
  for (double v : z)
    if (v < 0.0) throw std::invalid_argument("knap_min needs z >= 0 componentwise");
  return detail::linear_min_over_claims(z, claims);
}

namespace {

std::vector<double> combine(const std::vector<std::vector<double>>& basis,
                            const std::vector<double>& mu) {
  std::vector<double> z(basis.empty() ? 0 : basis[0].size(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (mu[k] == 0.0) continue;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += mu[k] * basis[k][i];
  }
  return z;
}

struct Cut {
  double intercept;           // f(z_t) - g_t.z_t
  std::vector<double> slope;  // g_t projected onto mu coordinates
};

}  // namespace

ConeMinResult min_over_cone(const ConeObjective& objective,
                            const std::vector<std::vector<double>>& basis,
                            const ConeMinOptions& options) {
  ConeMinResult res;
  if (basis.empty()) {
    res.status = ConeStatus::EmptyBasis;
    return res;
  }
  const std::size_t K = basis.size();

  auto eval_mu = [&](const std::vector<double>& mu) { return objective.value(combine(basis, mu)); };
  auto grad_mu = [&](const std::vector<double>& mu) {
    std::vector<double> g = objective.subgradient(combine(basis, mu));
    std::vector<double> out(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      out[k] = std::inner_product(g.begin(), g.end(), basis[k].begin(), 0.0);
    return out;
  };

  std::vector<Cut> cuts;
  auto add_cut = [&](const std::vector<double>& mu, double fmu) {
    std::vector<double> g = grad_mu(mu);
    double intercept = fmu - std::inner_product(g.begin(), g.end(), mu.begin(), 0.0);
    cuts.push_back({intercept, std::move(g)});
    if (cuts.size() > 120) cuts.erase(cuts.begin());
  };

  std::vector<double> mu(K, 0.0);
  double best = eval_mu(mu);
  std::vector<double> best_mu = mu;
  add_cut(mu, best);

  // Warm start from each generator alone with a scale search.
  for (std::size_t k = 0; k < K; ++k) {
    auto phi = [&](double t) {
      std::vector<double> m(K, 0.0);
      m[k] = t;
      return eval_mu(m);
    };
    auto [t, v] = min_convex_1d(phi, 0.0, 8.0);
    if (v < best) {
      best = v;
      best_mu.assign(K, 0.0);
      best_mu[k] = t;
    }
  }
  mu = best_mu;

  double lb = -std::numeric_limits<double>::infinity();
  double box = 4.0;
  auto lower_bound_lp = [&]() {
    // min t over {0 <= mu <= box} subject to every cut; the box is grown
    // until it strictly contains the bound's argmin, keeping the bound valid
    // for coercive objectives.
    for (;;) {
      LinearProgram lp;
      lp.objective.assign(K + 1, 0.0);
      lp.objective[K] = 1.0;
      lp.lower.assign(K + 1, 0.0);
      lp.upper.assign(K + 1, box);
      lp.lower[K] = -LinearProgram::inf();
      lp.upper[K] = LinearProgram::inf();
      for (const auto& c : cuts) {
        std::vector<double> row(K + 1, 0.0);
        for (std::size_t k = 0; k < K; ++k) row[k] = c.slope[k];
        row[K] = -1.0;
        lp.add_ineq(std::move(row), -c.intercept);
      }
      auto sol = lp_solve(lp);
      if (sol.status != LpStatus::Optimal) return lb;
      bool at_wall = false;
      for (std::size_t k = 0; k < K; ++k) at_wall |= sol.x[k] > 0.999 * box;
      if (!at_wall || box >= options.coeff_cap) return sol.objective;
      box *= 4.0;
    }
  };

  int it = 0;
  for (; it < options.max_iters; ++it) {
    std::vector<double> g = grad_mu(mu);
    std::vector<double> dir(K, 0.0);
    double dnorm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double d = -g[k];
      if (mu[k] <= 0.0 && d < 0.0) d = 0.0;
      dir[k] = d;
      dnorm += d * d;
    }
    double fcur = eval_mu(mu);

    if (dnorm > 1e-24) {
      double tmax = 4.0 / std::sqrt(dnorm);
      for (std::size_t k = 0; k < K; ++k) {
        if (dir[k] < 0.0) tmax = std::min(tmax, mu[k] / -dir[k]);
        if (dir[k] > 0.0) tmax = std::min(tmax, (options.coeff_cap - mu[k]) / dir[k]);
      }
      if (tmax > 0.0) {
        auto phi = [&](double t) {
          std::vector<double> m(mu);
          for (std::size_t k = 0; k < K; ++k) m[k] = std::max(0.0, m[k] + t * dir[k]);
          return eval_mu(m);
        };
        auto [t, v] = min_convex_1d(phi, 0.0, tmax);
        if (v < fcur) {
          for (std::size_t k = 0; k < K; ++k) mu[k] = std::max(0.0, mu[k] + t * dir[k]);
          fcur = v;
        }
      }
    }

    // Scale polish handles the lambda direction and the apex limit.
    {
      auto phi = [&](double s) {
        std::vector<double> m(mu);
        for (auto& v : m) v *= s;
        return eval_mu(m);
      };
      auto [s, v] = min_convex_1d(phi, 0.0, 4.0);
      if (v < fcur) {
        for (auto& vk : mu) vk *= s;
        fcur = v;
      }
    }
    // Coordinate polish.
    if (it % 8 == 7) {
      for (std::size_t k = 0; k < K; ++k) {
        auto phi = [&](double t) {
          std::vector<double> m(mu);
          m[k] = t;
          return eval_mu(m);
        };
        auto [t, v] = min_convex_1d(phi, 0.0, std::max(1.0, 4.0 * mu[k]));
        if (v < fcur) {
          mu[k] = t;
          fcur = v;
        }
      }
    }

    if (fcur < best) {
      best = fcur;
      best_mu = mu;
    }
    add_cut(mu, fcur);

    if (best < -1e12) {
      res.status = ConeStatus::Unbounded;
      res.value = best;
      res.iterations = it;
      return res;
    }
    if (it % 16 == 15 || it == options.max_iters - 1) {
      lb = std::max(lb, lower_bound_lp());
      if (best - lb < options.gap_tol) {
        ++it;
        break;
      }
    }
  }

  lb = std::max(lb, lower_bound_lp());
  res.status = best - lb < options.gap_tol ? ConeStatus::Converged : ConeStatus::IterationLimit;
  res.coefficients = best_mu;
  res.point = combine(basis, best_mu);
  res.value = best;
  res.lower_bound = lb;
  res.gap = best - lb;
  res.iterations = it;
  double znorm = 0.0;
  for (double v : res.point) znorm += std::abs(v);
  res.attained = znorm > 1e-9;
  return res;
}

}  // namespace ftaplab
