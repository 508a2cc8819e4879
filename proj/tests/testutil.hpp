#pragma once

// Shared generators and independent oracles for the test suites. Oracles
// here must not reuse the library's solution path for the quantity they
// check.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "ftaplab/largemarket.hpp"
#include "ftaplab/linprog.hpp"
#include "ftaplab/market.hpp"
#include "ftaplab/orlicz.hpp"
#include "ftaplab/prob.hpp"

namespace testutil {

using namespace ftaplab;

inline FiniteProbSpace random_space(std::mt19937& rng, int min_atoms = 2, int max_atoms = 10) {
  std::uniform_int_distribution<int> natoms(min_atoms, max_atoms);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  int n = natoms(rng);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& v : p) {
    v = mass(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  return FiniteProbSpace(p);
}

inline YoungFunction random_young(std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> expo(1.3, 4.0);
  switch (pick(rng)) {
    case 0:
      return YoungFunction::power(expo(rng));
    case 1:
      return YoungFunction::exp_minus_linear();
    case 2:
      return YoungFunction::entropy();
    default: {
      std::uniform_real_distribution<double> step(0.3, 1.2);
      std::vector<YoungFunction::DerivativeKnot> knots{{0.0, 0.0}};
      double x = 0.0, s = 0.0;
      for (int i = 0; i < 4; ++i) {
        x += step(rng);
        s += step(rng);
        knots.push_back({x, s});
      }
      return YoungFunction::tabulated(knots, expo(rng));
    }
  }
}

inline std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

/// Random event-tree market: depth <= max_periods, leaves <= max_leaves.
inline FiniteMarket random_market(std::mt19937& rng, int max_periods = 3, int max_leaves = 12,
                                  int max_assets = 2) {
  std::uniform_int_distribution<int> period_pick(1, max_periods);
  std::uniform_int_distribution<int> asset_pick(1, max_assets);
  std::uniform_real_distribution<double> price0(-1.0, 1.0);
  std::uniform_real_distribution<double> jump(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.1, 1.0);
  std::bernoulli_distribution wide(0.3);

  int T = period_pick(rng);
  while ((1 << T) > max_leaves) --T;
  int d = asset_pick(rng);

  std::vector<MarketNode> nodes;
  MarketNode root;
  root.id = "r";
  root.parent = -1;
  root.prob = 1.0;
  for (int j = 0; j < d; ++j) root.prices.push_back(price0(rng));
  nodes.push_back(root);

  std::vector<int> level{0};
  for (int t = 0; t < T; ++t) {
    std::vector<int> next;
    int remaining = static_cast<int>(level.size());
    int width = 0;
    for (int v : level) {
      --remaining;
      int b = 2;
      long projected = (width + 3 + 2L * remaining) << (T - t - 1);
      if (wide(rng) && projected <= max_leaves) b = 3;
      width += b;
      std::vector<double> probs(static_cast<std::size_t>(b));
      double total = 0.0;
      for (auto& p : probs) {
        p = mass(rng);
        total += p;
      }
      for (auto& p : probs) p /= total;
      for (int c = 0; c < b; ++c) {
        MarketNode nd;
        nd.id = nodes[static_cast<std::size_t>(v)].id + "_" + std::to_string(c);
        nd.parent = v;
        nd.prob = probs[static_cast<std::size_t>(c)];
        for (int j = 0; j < d; ++j)
          nd.prices.push_back(nodes[static_cast<std::size_t>(v)].prices[static_cast<std::size_t>(j)] +
                              jump(rng));
        next.push_back(static_cast<int>(nodes.size()));
        nodes.push_back(std::move(nd));
      }
    }
    level = std::move(next);
  }
  return FiniteMarket(T, d, std::move(nodes));
}

/// Brute-force LP oracle: enumerates candidate active sets of the polytope
/// {eq rows active; subsets of ineq rows and finite bounds}, solves the
/// square system by Gaussian elimination, and scans feasible vertices.
/// Assumes a bounded feasible region. Returns the optimal value.
inline std::optional<double> lp_vertex_oracle(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  struct Row {
    std::vector<double> a;
    double b;
  };
  std::vector<Row> pool;  // optional active rows
  for (std::size_t i = 0; i < lp.ineq_b.size(); ++i) pool.push_back({lp.ineq_A[i], lp.ineq_b[i]});
  for (std::size_t j = 0; j < n; ++j) {
    if (!lp.lower.empty() && std::isfinite(lp.lower[j])) {
      std::vector<double> a(n, 0.0);
      a[j] = 1.0;
      pool.push_back({a, lp.lower[j]});
    }
    if (!lp.upper.empty() && std::isfinite(lp.upper[j])) {
      std::vector<double> a(n, 0.0);
      a[j] = 1.0;
      pool.push_back({a, lp.upper[j]});
    }
  }
  const std::size_t neq = lp.eq_b.size();
  if (neq > n) return std::nullopt;
  const std::size_t need = n - neq;

  std::optional<double> best;
  std::vector<std::size_t> comb(need);
  for (std::size_t i = 0; i < need; ++i) comb[i] = i;
  auto advance = [&]() {
    if (need == 0) return false;
    std::size_t i = need;
    while (i-- > 0) {
      if (comb[i] != pool.size() - need + i) {
        ++comb[i];
        for (std::size_t j = i + 1; j < need; ++j) comb[j] = comb[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  if (pool.size() < need) return std::nullopt;

  do {
    std::vector<std::vector<double>> M;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < neq; ++i) {
      M.push_back(lp.eq_A[i]);
      rhs.push_back(lp.eq_b[i]);
    }
    for (std::size_t i = 0; i < need; ++i) {
      M.push_back(pool[comb[i]].a);
      rhs.push_back(pool[comb[i]].b);
    }
    // Gaussian elimination with partial pivoting.
    std::vector<double> x(n, 0.0);
    bool singular = false;
    for (std::size_t col = 0; col < n && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col; r < n; ++r)
        if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
      if (std::abs(M[piv][col]) < 1e-11) {
        singular = true;
        break;
      }
      std::swap(M[piv], M[col]);
      std::swap(rhs[piv], rhs[col]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        double f = M[r][col] / M[col][col];
        if (f == 0.0) continue;
        for (std::size_t c2 = col; c2 < n; ++c2) M[r][c2] -= f * M[col][c2];
        rhs[r] -= f * rhs[col];
      }
    }
    if (singular) continue;
    for (std::size_t j = 0; j < n; ++j) x[j] = rhs[j] / M[j][j];

    bool feasible = true;
    for (std::size_t i = 0; i < lp.eq_b.size() && feasible; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.eq_A[i][j] * x[j];
      feasible = std::abs(s - lp.eq_b[i]) <= 1e-7;
    }
    for (std::size_t i = 0; i < lp.ineq_b.size() && feasible; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.ineq_A[i][j] * x[j];
      feasible = s <= lp.ineq_b[i] + 1e-7;
    }
    for (std::size_t j = 0; j < n && feasible; ++j) {
      if (!lp.lower.empty() && std::isfinite(lp.lower[j])) feasible = x[j] >= lp.lower[j] - 1e-7;
      if (!lp.upper.empty() && std::isfinite(lp.upper[j])) feasible = feasible && x[j] <= lp.upper[j] + 1e-7;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
    if (!best || (lp.maximize ? obj > *best : obj < *best)) best = obj;
  } while (advance());
  return best;
}

/// Exhaustive oracle for the fractional extremal problem: enumerates the
/// vertices of {0 <= w <= 1, E_c[w] >= eps} (0/1 sets plus at most one
/// fractional atom on the active constraint) and minimizes the objective.
inline double extremal_vertex_oracle(const std::vector<double>& objective,
                                     const std::vector<double>& constraint, double eps) {
  const std::size_t n = objective.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double cmass = 0.0, cost = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      if (mask & (1u << l)) {
        cmass += constraint[l];
        cost += objective[l];
      }
    if (cmass >= eps - 1e-15) best = std::min(best, cost);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      if (constraint[j] <= 0.0) continue;
      double theta = (eps - cmass) / constraint[j];
      if (theta > 0.0 && theta <= 1.0)
        best = std::min(best, cost + theta * objective[j]);
    }
  }
  return best;
}

/// Vertices of D^eps = {0 <= w <= 1, E_p[w] >= eps}: indicator parts plus
/// one fractional atom where the mean constraint binds.
inline std::vector<std::vector<double>> claim_set_vertices(const std::vector<double>& p,
                                                           double eps) {
  const std::size_t n = p.size();
  std::vector<std::vector<double>> verts;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double mass = 0.0;
    std::vector<double> w(n, 0.0);
    for (std::size_t l = 0; l < n; ++l)
      if (mask & (1u << l)) {
        w[l] = 1.0;
        mass += p[l];
      }
    if (mass >= eps - 1e-15) verts.push_back(w);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      double theta = (eps - mass) / p[j];
      if (theta > 0.0 && theta < 1.0) {
        auto wf = w;
        wf[j] = theta;
        verts.push_back(wf);
      }
    }
  }
  return verts;
}

}  // namespace testutil
