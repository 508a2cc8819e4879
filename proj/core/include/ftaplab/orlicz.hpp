#pragma once

#include <optional>
#include <vector>

#include "ftaplab/prob.hpp"
#include "ftaplab/young.hpp"

namespace ftaplab {

/// Luxemburg norm ||f||_F = inf{a > 0 : E_P[F(|f|/a)] <= 1}, by bisection
/// on a (the map a -> E[F(|f|/a)] is nonincreasing). Returns 0 iff f = 0.
double luxemburg_norm(const std::vector<double>& f, const FiniteProbSpace& space,
                      const YoungFunction& F);

/// Minkowski gauge of the polar V^F: sup{|E_P[gh]| : E_P[F(|h|)] <= 1}.
/// The optimal h has |h| = (F')^{-1}(|g|/lambda) with lambda > 0 chosen so
/// that E[F(|h|)] = 1; g belongs to V^F iff the result is <= 1.
double polar_gauge(const std::vector<double>& g, const FiniteProbSpace& space,
                   const YoungFunction& F);

struct GaugeWitness {
  double value = 0.0;
  std::vector<double> h;  // maximizer on the Orlicz ball boundary
};

/// polar_gauge together with the maximizing h (signed to match g).
GaugeWitness polar_gauge_witness(const std::vector<double>& g, const FiniteProbSpace& space,
                                 const YoungFunction& F);

/// A nondecreasing concave utility with u(0) = 0. Either u_F(x) = -F(-x)
/// for x <= 0 and 0 above (the Young-function bridge), or piecewise linear
/// concave from breakpoints.
class UtilityFunction {
 public:
  /// u_F(x) = -F(-x) for x <= 0, 0 for x > 0.
  static UtilityFunction from_young(YoungFunction F);

  /// Piecewise linear concave utility anchored at u(0)=0. Slopes apply on
  /// the segments split at the given breakpoints (ascending, may include
  /// negatives); slopes must be nonincreasing and nonnegative.
  /// slopes.size() == breakpoints.size() + 1; slopes.front() rules
  /// (-inf, breakpoints.front()), slopes.back() rules (breakpoints.back(), inf).
  static UtilityFunction piecewise(std::vector<double> breakpoints, std::vector<double> slopes);

  bool is_from_young() const { return young_.has_value(); }
  const YoungFunction& young() const;

  double value(double x) const;
  /// A supergradient of u at x (right derivative).
  double super_derivative(double x) const;
  /// Largest slope attained anywhere (slope at -inf for piecewise; +inf is
  /// never reached for u_F since F' is finite on compacts).
  double max_slope_hint() const;
  /// Leftmost kink location, 0 when there is none.
  double leftmost_breakpoint() const;

 private:
  UtilityFunction() = default;
  std::optional<YoungFunction> young_;
  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> values_at_breaks_;
};

/// u_F from F; equivalent to UtilityFunction::from_young.
UtilityFunction utility_from_young(const YoungFunction& F);

/// Convex dual v(y) = sup_x(u(x) - xy) for u = u_F; equals the
/// complementary Young function of F. Rejects piecewise utilities.
YoungFunction conjugate_utility(const UtilityFunction& u);

/// A Young function F^eps with u_{F^eps}(x) - eps <= u(x) for all x,
/// fitted within the power family c*y^p and verified on an adaptive grid
/// with a convexity certificate for the tail.
YoungFunction young_minorant(const UtilityFunction& u, double eps);

}  // namespace ftaplab
