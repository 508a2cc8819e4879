#pragma once

// Templated dense two-phase simplex shared by the double and exact-rational
// entry points. Internal to the library.

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "ftaplab/linprog.hpp"

namespace ftaplab::detail {

template <class T>
struct StandardForm {
  // min c'y  s.t.  A y = b, y >= 0
  std::vector<std::vector<T>> A;
  std::vector<T> b;
  std::vector<T> c;
  int cols = 0;

  // reconstruction of the original variables
  struct VarMap {
    int col = -1;       // primary column
    int col_neg = -1;   // second column for free variables
    T offset{};
    int sign = 1;       // x = offset + sign*y[col] (+ free split)
  };
  std::vector<VarMap> vars;
  bool trivially_infeasible = false;
};

template <class T>
T tabs(const T& v) {
  return v < T(0) ? T(-v) : v;
}

template <class T>
StandardForm<T> to_standard_form(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  StandardForm<T> sf;
  sf.vars.resize(n);

  auto lower_of = [&](std::size_t j) {
    return lp.lower.empty() ? -LinearProgram::inf() : lp.lower[j];
  };
  auto upper_of = [&](std::size_t j) {
    return lp.upper.empty() ? LinearProgram::inf() : lp.upper[j];
  };

  struct BoundRow {
    int col;
    T rhs;
  };
  std::vector<BoundRow> bound_rows;

  int next = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double lo = lower_of(j), up = upper_of(j);
    if (lo > up) {
      sf.trivially_infeasible = true;
      return sf;
    }
    auto& vm = sf.vars[j];
    if (std::isfinite(lo)) {
      vm.col = next++;
      vm.offset = T(lo);
      vm.sign = 1;
      if (std::isfinite(up)) bound_rows.push_back({vm.col, T(up) - T(lo)});
    } else if (std::isfinite(up)) {
      vm.col = next++;
      vm.offset = T(up);
      vm.sign = -1;
    } else {
      vm.col = next++;
      vm.col_neg = next++;
      vm.offset = T(0);
      vm.sign = 1;
    }
  }

  const std::size_t n_ineq = lp.ineq_b.size();
  const int slack_base = next;
  next += static_cast<int>(n_ineq + bound_rows.size());
  sf.cols = next;

  auto make_row = [&](const std::vector<double>& a, double rhs) {
    std::vector<T> row(sf.cols, T(0));
    T r = T(rhs);
    for (std::size_t j = 0; j < n; ++j) {
      if (a[j] == 0.0) continue;
      const auto& vm = sf.vars[j];
      T aj = T(a[j]);
      row[vm.col] += vm.sign > 0 ? aj : T(-aj);
      if (vm.col_neg >= 0) row[vm.col_neg] -= aj;
      r -= aj * vm.offset;
    }
    return std::pair<std::vector<T>, T>(std::move(row), r);
  };

  for (std::size_t i = 0; i < lp.eq_b.size(); ++i) {
    auto [row, r] = make_row(lp.eq_A[i], lp.eq_b[i]);
    sf.A.push_back(std::move(row));
    sf.b.push_back(r);
  }
  for (std::size_t i = 0; i < n_ineq; ++i) {
    auto [row, r] = make_row(lp.ineq_A[i], lp.ineq_b[i]);
    row[slack_base + static_cast<int>(i)] = T(1);
    sf.A.push_back(std::move(row));
    sf.b.push_back(r);
  }
  for (std::size_t i = 0; i < bound_rows.size(); ++i) {
    std::vector<T> row(sf.cols, T(0));
    row[bound_rows[i].col] = T(1);
    row[slack_base + static_cast<int>(n_ineq + i)] = T(1);
    sf.A.push_back(std::move(row));
    sf.b.push_back(bound_rows[i].rhs);
  }

  sf.c.assign(sf.cols, T(0));
  for (std::size_t j = 0; j < n; ++j) {
    double cj = lp.objective[j];
    if (cj == 0.0) continue;
    T v = lp.maximize ? T(-cj) : T(cj);
    const auto& vm = sf.vars[j];
    sf.c[vm.col] += vm.sign > 0 ? v : T(-v);
    if (vm.col_neg >= 0) sf.c[vm.col_neg] -= v;
  }

  // b >= 0 for the phase-1 start
  for (std::size_t i = 0; i < sf.b.size(); ++i) {
    if (sf.b[i] < T(0)) {
      sf.b[i] = T(-sf.b[i]);
      for (auto& v : sf.A[i]) v = T(-v);
    }
  }
  return sf;
}

template <class T>
struct SimplexOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> y;
  int pivots = 0;
  bool degenerate = false;
  double growth = 1.0;
};

template <class T>
class SimplexTableau {
 public:
  SimplexTableau(std::vector<std::vector<T>> A, std::vector<T> b, int cols, T eps)
      : A_(std::move(A)), b_(std::move(b)), cols_(cols), eps_(eps) {}

  // Runs both phases; cost is over structural columns only.
  SimplexOutcome<T> optimize(const std::vector<T>& cost, int max_pivots) {
    SimplexOutcome<T> out;
    const int m = static_cast<int>(A_.size());
    const int ns = cols_;

    // Phase 1: append artificials.
    for (int i = 0; i < m; ++i) {
      A_[i].resize(ns + m, T(0));
      A_[i][ns + i] = T(1);
    }
    basis_.resize(m);
    for (int i = 0; i < m; ++i) basis_[i] = ns + i;
    std::vector<T> phase1(ns + m, T(0));
    for (int i = 0; i < m; ++i) phase1[ns + i] = T(1);

    if (!iterate(phase1, ns + m, max_pivots, out)) return out;
    T art = T(0);
    for (int i = 0; i < m; ++i)
      if (basis_[i] >= ns) art += b_[i];
    if (art > eps_) {
      out.status = LpStatus::Infeasible;
      return out;
    }

    // Drive artificials out of the basis; rows that cannot pivot are redundant.
    for (int i = static_cast<int>(basis_.size()) - 1; i >= 0; --i) {
      if (basis_[i] < ns) continue;
      int enter = -1;
      for (int j = 0; j < ns; ++j)
        if (tabs(A_[i][j]) > eps_) {
          enter = j;
          break;
        }
      if (enter >= 0) {
        pivot(i, enter);
        ++out.pivots;
      } else {
        A_.erase(A_.begin() + i);
        b_.erase(b_.begin() + i);
        basis_.erase(basis_.begin() + i);
      }
    }
    for (auto& row : A_) row.resize(ns);

    if (!iterate(cost, ns, max_pivots, out)) return out;

    out.status = LpStatus::Optimal;
    out.y.assign(ns, T(0));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      out.y[basis_[i]] = b_[i];
      if (b_[i] <= eps_) out.degenerate = true;
    }
    out.growth = growth_;
    return out;
  }

 private:
  // Bland's rule throughout: smallest eligible entering index, smallest
  // basis index among ratio ties. Returns false on unbounded/iteration cap.
  bool iterate(const std::vector<T>& cost, int ncols, int max_pivots, SimplexOutcome<T>& out) {
    const int m = static_cast<int>(A_.size());
    for (;;) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        T rc = cost[j];
        for (int i = 0; i < m; ++i)
          if (A_[i][j] != T(0) && cost[basis_[i]] != T(0)) rc -= cost[basis_[i]] * A_[i][j];
        if (rc < -eps_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      T best_ratio{};
      for (int i = 0; i < m; ++i) {
        if (A_[i][enter] > eps_) {
          T ratio = b_[i] / A_[i][enter];
          if (leave < 0 || ratio < best_ratio ||
              (ratio == best_ratio && basis_[i] < basis_[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) {
        out.status = LpStatus::Unbounded;
        return false;
      }
      pivot(leave, enter);
      if (++out.pivots > max_pivots) {
        out.status = LpStatus::IterationLimit;
        return false;
      }
    }
  }

  void pivot(int row, int col) {
    const int m = static_cast<int>(A_.size());
    const int ncols = static_cast<int>(A_[row].size());
    T p = A_[row][col];
    for (int j = 0; j < ncols; ++j) A_[row][j] /= p;
    b_[row] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      T f = A_[i][col];
      if (f == T(0)) continue;
      for (int j = 0; j < ncols; ++j) A_[i][j] -= f * A_[row][j];
      b_[i] -= f * b_[row];
      if constexpr (std::is_same_v<T, double>) {
        for (int j = 0; j < ncols; ++j) growth_ = std::max(growth_, std::abs(A_[i][j]));
      }
    }
    basis_[row] = col;
  }

  std::vector<std::vector<T>> A_;
  std::vector<T> b_;
  std::vector<int> basis_;
  int cols_;
  T eps_;
  double growth_ = 1.0;
};

template <class T>
struct GeneralOutcome {
  LpStatus status;
  std::vector<T> x;
  T objective;
  int pivots = 0;
  bool degenerate = false;
  double growth = 1.0;
};

template <class T>
GeneralOutcome<T> solve_general(const LinearProgram& lp, T eps, int max_pivots = 50000) {
  lp.validate();
  GeneralOutcome<T> out{LpStatus::Infeasible, {}, T(0)};
  StandardForm<T> sf = to_standard_form<T>(lp);
  if (sf.trivially_infeasible) return out;

  SimplexTableau<T> tab(std::move(sf.A), std::move(sf.b), sf.cols, eps);
  SimplexOutcome<T> so = tab.optimize(sf.c, max_pivots);
  out.status = so.status;
  out.pivots = so.pivots;
  out.degenerate = so.degenerate;
  out.growth = so.growth;
  if (so.status != LpStatus::Optimal) return out;

  out.x.resize(lp.num_vars());
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const auto& vm = sf.vars[j];
    T y = so.y[vm.col];
    if (vm.col_neg >= 0) y -= so.y[vm.col_neg];
    out.x[j] = vm.offset + (vm.sign > 0 ? y : T(-y));
  }
  T obj = T(0);
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    if (lp.objective[j] != 0.0) obj += T(lp.objective[j]) * out.x[j];
  out.objective = obj;
  return out;
}

}  // namespace ftaplab::detail
