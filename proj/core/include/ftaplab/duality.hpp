#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ftaplab/market.hpp"
#include "ftaplab/orlicz.hpp"

namespace ftaplab {

/// Expected-utility problem sup_{f in C} E_R[u(f - w)] on a finite market.
struct UtilityProblem {
  FiniteMarket market;
  UtilityFunction u;
  DensityVector belief;               // dR/dP on the leaf space, strictly positive
  std::vector<double> endowment_shift;  // w

  /// R-measure of each leaf.
  std::vector<double> belief_measure() const;
  void validate() const;
};

struct PrimalResult {
  double value = 0.0;
  bool unbounded = false;             // u(+inf) reached along a recession direction
  std::vector<double> strategy;       // xi achieving the reported value
  std::vector<double> payoff;         // B xi
};

/// Projected supergradient with line searches and restarts over strategy
/// coordinates (f = B xi; dropping the subtracted nonnegative part is
/// optimal since u is nondecreasing).
PrimalResult sup_utility_primal(const UtilityProblem& prob);

struct DualSolution {
  bool attained = false;
  std::vector<double> q;              // minimizing separating measure
  std::vector<double> density_wrt_belief;  // dQ/dR
  double lambda = 0.0;
  double value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;                   // value - primal_value
  std::string warning;
};

/// Dual of the utility problem for u = u_F: minimize
/// E_R[-lambda (dQ/dR) w + v(lambda dQ/dR)] over separating measures Q and
/// lambda > 0, with v the complementary Young function. When the primal
/// supremum is 0 the infimum is approached as lambda -> 0 and is reported
/// with attained = false.
DualSolution sup_utility_dual(const UtilityProblem& prob);

struct LambdaBracket {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
};

/// [lambda0, lambda1] containing the dual optimizer's lambda whenever the
/// problem value with w in [0,1] lies below -delta: lambda0 = delta and
/// lambda1 is the largest root of v(lambda) - lambda = -delta.
LambdaBracket lambda_bracket(const YoungFunction& F, double delta);

struct MarketFreeLunchSignal : std::runtime_error {
  explicit MarketFreeLunchSignal(double primal)
      : std::runtime_error("precondition failed: primal value " + std::to_string(primal) +
                           " is not below the requested -delta"),
        primal_value(primal) {}
  double primal_value;
};

struct SeparatingFromSetResult {
  std::vector<double> q;          // Q^A
  double lambda = 0.0;
  double dual_value = 0.0;
  double gamma = 0.0;             // delta / lambda1
  double q_mass_on_set = 0.0;     // Q^A(A), certified > gamma
  double ball_bound = 0.0;        // E_R[v(delta dQ/dR)] / (lambda1 - delta), certified <= 1
  LambdaBracket bracket;
};

/// Runs the dual with w = 1_A and certifies the set-mass and Orlicz-ball
/// bounds that make Q^A usable in the measure-selection step. Throws
/// MarketFreeLunchSignal when the primal value is not below -delta.
SeparatingFromSetResult separating_from_set(const FiniteMarket& market, const DensityVector& R,
                                            const std::vector<std::size_t>& A,
                                            const YoungFunction& F, double delta);

}  // namespace ftaplab
