#include "ftaplab/duality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ftaplab/convex.hpp"

namespace ftaplab {

std::vector<double> UtilityProblem::belief_measure() const {
  const auto& space = market.leaf_space();
  std::vector<double> r(space.size());
  for (std::size_t l = 0; l < r.size(); ++l) r[l] = space.prob(l) * belief[l];
  return r;
}

void UtilityProblem::validate() const {
  if (!(belief.space() == market.leaf_space()))
    throw std::invalid_argument("belief density is not indexed by the market's leaf space");
  belief.require_probability_density();
  if (!belief.is_strictly_positive())
    throw std::invalid_argument("belief density must be strictly positive (R ~ P)");
  market.leaf_space().require_length(endowment_shift);
}

namespace {

double objective_at(const std::vector<double>& rmeas, const UtilityFunction& u,
                    const std::vector<double>& payoff, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t l = 0; l < rmeas.size(); ++l) s += rmeas[l] * u.value(payoff[l] - w[l]);
  return s;
}

// One restart of supergradient ascent with golden line searches plus
// coordinate sweeps; the objective is concave in xi.
double ascend(const GainsBasis& basis, const std::vector<double>& rmeas, const UtilityFunction& u,
              const std::vector<double>& w, std::vector<double>& xi, bool* unbounded) {
  const std::size_t m = basis.num_columns();
  auto value_of = [&](const std::vector<double>& x) {
    return objective_at(rmeas, u, basis.apply(x), w);
  };
  double fx = value_of(xi);
  for (int round = 0; round < 400; ++round) {
    std::vector<double> payoff = basis.apply(xi);
    std::vector<double> g(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < rmeas.size(); ++l)
        s += rmeas[l] * u.super_derivative(payoff[l] - w[l]) * basis.columns[k][l];
      g[k] = s;
    }
    double gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    double improved = 0.0;
    if (gnorm > 1e-14) {
      double hi = 1.0 / std::max(gnorm, 1.0);
      auto along = [&](double t) {
        std::vector<double> x(xi);
        for (std::size_t k = 0; k < m; ++k) x[k] += t * g[k];
        return -value_of(x);
      };
      while (hi < 1e8 && along(2.0 * hi) < along(hi)) hi *= 2.0;
      auto [t, negv] = min_convex_1d(along, 0.0, 2.0 * hi);
      if (-negv > fx) {
        for (std::size_t k = 0; k < m; ++k) xi[k] += t * g[k];
        improved = -negv - fx;
        fx = -negv;
      }
    }
    if (round % 4 == 3 || improved <= 1e-13 * (1.0 + std::abs(fx))) {
      for (std::size_t k = 0; k < m; ++k) {
        double radius = 1.0 + std::abs(xi[k]);
        auto along = [&](double t) {
          std::vector<double> x(xi);
          x[k] = t;
          return -value_of(x);
        };
        auto [t, negv] = min_convex_1d(along, xi[k] - radius, xi[k] + radius);
        if (-negv > fx) {
          improved += -negv - fx;
          fx = -negv;
          xi[k] = t;
        }
      }
    }
    if (fx > 1e9) {
      *unbounded = true;
      return fx;
    }
    if (improved <= 1e-13 * (1.0 + std::abs(fx))) break;
  }
  return fx;
}

}  // namespace

PrimalResult sup_utility_primal(const UtilityProblem& prob) {
  prob.validate();
  GainsBasis basis = gains_basis(prob.market);
  std::vector<double> rmeas = prob.belief_measure();
  const std::size_t m = basis.num_columns();

  PrimalResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> starts{std::vector<double>(m, 0.0),
                                          std::vector<double>(m, 0.5),
                                          std::vector<double>(m, -0.5)};
  for (auto& xi : starts) {
    bool unbounded = false;
    double v = ascend(basis, rmeas, prob.u, prob.endowment_shift, xi, &unbounded);
    if (unbounded) {
      best.unbounded = true;
      best.value = v;
      best.strategy = xi;
      best.payoff = basis.apply(xi);
      return best;
    }
    if (v > best.value) {
      best.value = v;
      best.strategy = xi;
    }
  }
  best.payoff = basis.apply(best.strategy);
  return best;
}

namespace {

// Projection of a measure candidate onto the affine part of the separating
// polyhedron (sum q = 1, B'q = 0), followed by a feasibility check.
bool project_to_separating(const SeparatingSet& sep, std::vector<double>& q) {
  const std::size_t L = q.size();
  const std::size_t m = sep.basis().num_columns();
  Eigen::MatrixXd A(m + 1, L);
  Eigen::VectorXd b(m + 1);
  for (std::size_t l = 0; l < L; ++l) A(0, static_cast<int>(l)) = 1.0;
  b(0) = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l < L; ++l)
      A(static_cast<int>(k + 1), static_cast<int>(l)) = sep.basis().columns[k][l];
    b(static_cast<int>(k + 1)) = 0.0;
  }
  Eigen::VectorXd q0(L);
  for (std::size_t l = 0; l < L; ++l) q0(static_cast<int>(l)) = q[l];
  // q = q0 + A'(AA')^+ (b - A q0)
  Eigen::VectorXd resid = b - A * q0;
  Eigen::MatrixXd AAt = A * A.transpose();
  Eigen::VectorXd corr = A.transpose() * AAt.completeOrthogonalDecomposition().solve(resid);
  for (std::size_t l = 0; l < L; ++l) q[l] = q0(static_cast<int>(l)) + corr(static_cast<int>(l));
  for (double& v : q)
    if (v < 0.0 && v > -1e-9) v = 0.0;
  return sep.contains(q, 1e-7);
}

}  // namespace

DualSolution sup_utility_dual(const UtilityProblem& prob) {
  prob.validate();
  if (!prob.u.is_from_young())
    throw std::invalid_argument("sup_utility_dual needs u of u_F form");
  const YoungFunction F = prob.u.young();
  const YoungFunction v = F.conjugate();
  const auto& w = prob.endowment_shift;
  std::vector<double> rmeas = prob.belief_measure();
  const std::size_t L = rmeas.size();

  PrimalResult primal = sup_utility_primal(prob);
  DualSolution out;
  out.primal_value = primal.value;
  if (primal.value >= -1e-12) {
    out.attained = false;
    out.value = primal.value >= 0.0 ? primal.value : 0.0;
    out.lambda = 0.0;
    out.warning =
        "primal supremum is not strictly below u(+inf); the dual infimum is approached as "
        "lambda -> 0 and is not attained";
    return out;
  }

  SeparatingSet sep(prob.market);
  auto verts = sep.vertices();
  if (verts.empty())
    throw std::runtime_error("separating set is empty; the market admits total arbitrage");

  std::vector<std::vector<double>> cone_basis;
  for (const auto& q : verts) {
    std::vector<double> d(L);
    for (std::size_t l = 0; l < L; ++l) d[l] = q[l] / rmeas[l];
    cone_basis.push_back(std::move(d));
  }

  ConeObjective obj;
  obj.value = [&](const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t l = 0; l < L; ++l) s += rmeas[l] * (-z[l] * w[l] + v.value(z[l]));
    return s;
  };
  obj.subgradient = [&](const std::vector<double>& z) {
    std::vector<double> g(L);
    for (std::size_t l = 0; l < L; ++l) g[l] = rmeas[l] * (-w[l] + v.derivative(z[l]));
    return g;
  };

  ConeMinOptions opts;
  opts.gap_tol = 1e-9;
  auto cone = min_over_cone(obj, cone_basis, opts);

  std::vector<double> z = cone.point;
  double dual_value = cone.value;

  // Candidate from the primal first-order conditions: z = u'(B xi - w)
  // pointwise, projected back onto the separating polyhedron.
  {
    std::vector<double> zc(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
      double x = primal.payoff[l] - w[l];
      zc[l] = x < 0.0 ? F.derivative(-x) : 0.0;
    }
    double lam = 0.0;
    std::vector<double> qc(L);
    for (std::size_t l = 0; l < L; ++l) lam += rmeas[l] * zc[l];
    if (lam > 1e-14) {
      for (std::size_t l = 0; l < L; ++l) qc[l] = rmeas[l] * zc[l] / lam;
      if (project_to_separating(sep, qc)) {
        auto along = [&](double t) {
          double s = 0.0;
          for (std::size_t l = 0; l < L; ++l) {
            double zl = t * qc[l] / rmeas[l];
            s += rmeas[l] * (-zl * w[l] + v.value(zl));
          }
          return s;
        };
        auto [t, val] = min_convex_1d(along, 0.0, 8.0 * std::max(lam, 1e-6));
        if (val < dual_value) {
          dual_value = val;
          for (std::size_t l = 0; l < L; ++l) z[l] = t * qc[l] / rmeas[l];
        }
      }
    }
  }

  // Final polish of the scale for the reported direction.
  double lam = 0.0;
  for (std::size_t l = 0; l < L; ++l) lam += rmeas[l] * z[l];
  if (lam > 1e-14) {
    std::vector<double> rho(L);
    for (std::size_t l = 0; l < L; ++l) rho[l] = z[l] / lam;
    auto along = [&](double t) {
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l)
        s += rmeas[l] * (-t * rho[l] * w[l] + v.value(t * rho[l]));
      return s;
    };
    auto [t, val] = min_convex_1d(along, 0.0, 8.0 * lam);
    if (val < dual_value) {
      dual_value = val;
      for (std::size_t l = 0; l < L; ++l) z[l] = t * rho[l];
      lam = t;
    }
  }

  // Improve the primal from the dual candidate via the conjugate relation
  // f - w = -(F')^{-1}(z) wherever z > 0.
  {
    GainsBasis basis = gains_basis(prob.market);
    const std::size_t m = basis.num_columns();
    if (m > 0) {
      Eigen::MatrixXd B(L, m);
      Eigen::VectorXd target(L);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t k = 0; k < m; ++k)
          B(static_cast<int>(l), static_cast<int>(k)) = basis.columns[k][l];
        target(static_cast<int>(l)) =
            z[l] > 0.0 ? w[l] - F.derivative_inverse(z[l]) : w[l];
      }
      Eigen::VectorXd xi = B.colPivHouseholderQr().solve(target);
      std::vector<double> xiv(m);
      for (std::size_t k = 0; k < m; ++k) xiv[k] = xi(static_cast<int>(k));
      double cand = objective_at(rmeas, prob.u, basis.apply(xiv), w);
      if (cand > out.primal_value) {
        out.primal_value = cand;
        primal.strategy = xiv;
        primal.payoff = basis.apply(xiv);
      }
    }
  }

  out.attained = lam > 1e-12;
  out.lambda = lam;
  out.value = dual_value;
  out.gap = dual_value - out.primal_value;
  out.q.resize(L);
  out.density_wrt_belief.resize(L);
  if (out.attained) {
    std::vector<double> dens(L);
    for (std::size_t l = 0; l < L; ++l) {
      out.q[l] = rmeas[l] * z[l] / lam;
      dens[l] = z[l] / lam;
    }
    out.density_wrt_belief = dens;
  } else {
    out.warning = "dual infimum approached as lambda -> 0; minimizer not attained";
  }
  return out;
}

LambdaBracket lambda_bracket(const YoungFunction& F, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("lambda_bracket needs delta > 0");
  const YoungFunction v = F.conjugate();
  double f1 = F.value(1.0);
  if (delta > f1)
    throw std::domain_error(
        "delta exceeds F(1); v(lambda)-lambda never reaches -delta, so no dual value can lie "
        "below -delta");
  LambdaBracket out;
  out.lambda0 = delta;
  double lo = F.derivative(1.0);  // argmin of v(lambda) - lambda
  double hi = std::max(2.0 * lo, 1.0);
  while (v.value(hi) - hi <= -delta) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (v.value(mid) - mid <= -delta ? lo : hi) = mid;
  }
  out.lambda1 = 0.5 * (lo + hi);
  return out;
}

SeparatingFromSetResult separating_from_set(const FiniteMarket& market, const DensityVector& R,
                                            const std::vector<std::size_t>& A,
                                            const YoungFunction& F, double delta) {
  const std::size_t L = market.num_leaves();
  std::vector<double> w(L, 0.0);
  for (auto l : A) {
    if (l >= L) throw std::invalid_argument("set contains an out-of-range leaf index");
    w[l] = 1.0;
  }
  UtilityProblem prob{market, UtilityFunction::from_young(F), R, w};
  PrimalResult primal = sup_utility_primal(prob);
  if (!(primal.value < -delta)) throw MarketFreeLunchSignal(primal.value);

  DualSolution dual = sup_utility_dual(prob);
  SeparatingFromSetResult res;
  res.bracket = lambda_bracket(F, delta);
  res.gamma = delta / res.bracket.lambda1;
  res.q = dual.q;
  res.lambda = dual.lambda;
  res.dual_value = dual.value;
  for (auto l : A) res.q_mass_on_set += dual.q[l];

  const YoungFunction v = F.conjugate();
  std::vector<double> rmeas = prob.belief_measure();
  double mass = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    mass += rmeas[l] * v.value(delta * dual.density_wrt_belief[l]);
  res.ball_bound = mass / (res.bracket.lambda1 - delta);
  return res;
}

}  // namespace ftaplab
