#pragma once

#include <string>
#include <vector>

namespace ftaplab {

/// A Young function: convex F:[0,inf)->[0,inf) with F(0)=F'(0)=0 and F'
/// strictly increasing to infinity. Four representations are supported:
///
///   power    F(x) = c*x^p with p>1, c>0 (default c = 1/p)
///   expml    F(x) = e^x - x - 1
///   entropy  F(x) = (1+x)ln(1+x) - x
///   tab      F' sampled at knots, linearly interpolated, with a declared
///            polynomial tail F'(t) = s_K*(t/t_K)^(tail-1) beyond the last
///            knot so that F' -> inf is certified.
///
/// All evaluations are closed form; a tabulated derivative integrates to a
/// piecewise quadratic and its inverse is again piecewise linear, so
/// conjugation stays exact for every representation.
class YoungFunction {
 public:
  enum class Kind { Power, ExpMinusLinear, Entropy, Tabulated };

  struct DerivativeKnot {
    double x;      // argument, >= 0
    double slope;  // F'(x), >= 0
  };

  static YoungFunction power(double p, double c);
  static YoungFunction power(double p) { return power(p, 1.0 / p); }
  static YoungFunction exp_minus_linear();
  static YoungFunction entropy();
  static YoungFunction tabulated(std::vector<DerivativeKnot> knots, double tail_exponent);

  Kind kind() const { return kind_; }
  double power_exponent() const { return p_; }
  double power_coefficient() const { return c_; }
  const std::vector<DerivativeKnot>& knots() const { return knots_; }
  double tail_exponent() const { return p_; }

  /// F(x) for x >= 0. May return +inf on overflow.
  double value(double x) const;
  /// F'(x) for x >= 0.
  double derivative(double x) const;
  /// (F')^{-1}(y) for y >= 0.
  double derivative_inverse(double y) const;
  /// F^{-1}(y) for y >= 0, by bisection on the increasing value map.
  double value_inverse(double y) const;

  /// The complementary Young function G(y) = max_{x>=0}(xy - F(x)).
  YoungFunction conjugate() const;

  /// Text record, e.g. "power p=2 c=0.5", "expml", "entropy",
  /// "tab knots=[(0,0),(1,2)] tail=2".
  std::string to_text() const;
  static YoungFunction from_text(const std::string& record);

  bool operator==(const YoungFunction&) const = default;

 private:
  YoungFunction(Kind kind, double p, double c) : kind_(kind), p_(p), c_(c) {}
  void validate_tabulated() const;

  Kind kind_;
  double p_ = 0.0;  // power exponent, or tabulated tail exponent
  double c_ = 0.0;  // power coefficient
  std::vector<DerivativeKnot> knots_;
  std::vector<double> cumulative_;  // F at each knot, tabulated only
};

/// kappa / F(kappa): the uniform-integrability tail bound
/// sup_{h in B^F} E[|h| 1{|h| >= kappa}] <= kappa/F(kappa).
double ui_tail_bound(const YoungFunction& F, double kappa);

}  // namespace ftaplab
