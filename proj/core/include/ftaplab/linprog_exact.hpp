#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "ftaplab/linprog.hpp"

namespace ftaplab {

/// Exact rational scalar. Doubles convert losslessly (they are dyadic
/// rationals), so re-solving a small LP with this scalar certifies the
/// float verdict and yields certificates that verify exactly.
using Rational = boost::multiprecision::cpp_rational;

struct ExactLpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rational> x;
  Rational objective = 0;
  int pivots = 0;
};

/// Same contract as lp_solve but over exact rationals.
ExactLpResult lp_solve_exact(const LinearProgram& lp);

}  // namespace ftaplab
