#pragma once

#include <functional>
#include <vector>

#include "ftaplab/prob.hpp"

namespace ftaplab {

/// Golden-section minimization of a convex function on [lo, hi] to
/// interval width 1e-10. Returns {argmin, value}.
std::pair<double, double> min_convex_1d(const std::function<double(double)>& phi, double lo,
                                        double hi);

/// The claim class D^eps = {w : 0 <= w <= 1, E_P[w] >= eps}.
class ConstrainedClaimSet {
 public:
  ConstrainedClaimSet(double eps, FiniteProbSpace space) : eps_(eps), space_(std::move(space)) {
    if (!(eps > 0.0)) throw std::invalid_argument("claim set needs eps > 0");
  }
  double eps() const { return eps_; }
  const FiniteProbSpace& space() const { return space_; }
  /// eps > 1 makes the set empty (total mass is 1).
  bool empty() const { return eps_ > 1.0; }
  bool contains(const std::vector<double>& w, double tol = 1e-9) const;

 private:
  double eps_;
  FiniteProbSpace space_;
};

struct KnapResult {
  std::vector<double> w;
  double value = 0.0;
};

/// Linear minimization min sum_i z_i w_i over D^eps for z >= 0, by greedy
/// ascent on the ratio z_i/p_i (cheapest mass first, one fractional atom).
/// Exact for this LP; ties resolved by atom index.
KnapResult knap_min(const std::vector<double>& z, const ConstrainedClaimSet& claims);

namespace detail {
/// Same greedy, allowing negative coefficients (those atoms take w = 1 for free).
KnapResult linear_min_over_claims(const std::vector<double>& z, const ConstrainedClaimSet& claims);
}  // namespace detail

/// Convex objective with a subgradient oracle, evaluated on vectors in the
/// ambient (atom-indexed) space.
struct ConeObjective {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> subgradient;
};

enum class ConeStatus { Converged, IterationLimit, Unbounded, EmptyBasis };

struct ConeMinResult {
  ConeStatus status = ConeStatus::IterationLimit;
  std::vector<double> point;        // best z found (may be the apex 0)
  std::vector<double> coefficients; // mu with z = sum mu_k basis_k
  double value = 0.0;
  double lower_bound = 0.0;         // certified bound from cutting planes
  double gap = 0.0;
  bool attained = true;             // false when the infimum sits at the apex
  int iterations = 0;
};

struct ConeMinOptions {
  double gap_tol = 1e-7;
  int max_iters = 10000;
  double coeff_cap = 1e8;
};

/// Minimizes a convex functional over the closed cone
/// {sum_k mu_k basis_k : mu >= 0} by projected subgradient descent with
/// golden line searches plus a cutting-plane lower bound. The infimum over
/// the punctured cone (mu != 0) coincides by continuity; a minimizer at the
/// apex is reported with attained = false.
ConeMinResult min_over_cone(const ConeObjective& objective,
                            const std::vector<std::vector<double>>& basis,
                            const ConeMinOptions& options = {});

}  // namespace ftaplab
