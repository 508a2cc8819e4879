#pragma once

#include <limits>
#include <vector>

namespace ftaplab {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Dense linear program
///   opt c'x  s.t.  eq_A x = eq_b,  ineq_A x <= ineq_b,  lower <= x <= upper.
/// Empty bound vectors mean unbounded in that direction for every variable.
struct LinearProgram {
  bool maximize = false;
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_A;
  std::vector<double> eq_b;
  std::vector<std::vector<double>> ineq_A;
  std::vector<double> ineq_b;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  void add_eq(std::vector<double> row, double rhs);
  void add_ineq(std::vector<double> row, double rhs);
  /// Throws if dimensions are inconsistent or any rhs/bound is NaN.
  void validate() const;

  static constexpr double inf() { return std::numeric_limits<double>::infinity(); }
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
  bool degenerate = false;   // an optimal basic variable sits at zero
  double condition = 1.0;    // tableau growth factor, a rough conditioning hint
};

/// Dense two-phase simplex with Bland anti-cycling. Intended for
/// desk-scale problems (a few hundred variables).
LpResult lp_solve(const LinearProgram& lp);

}  // namespace ftaplab
