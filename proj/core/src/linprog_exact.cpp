#include "ftaplab/linprog_exact.hpp"

#include "simplex_impl.hpp"

namespace ftaplab {

ExactLpResult lp_solve_exact(const LinearProgram& lp) {
  auto g = detail::solve_general<Rational>(lp, Rational(0));
  ExactLpResult r;
  r.status = g.status;
  r.x = std::move(g.x);
  r.objective = g.objective;
  r.pivots = g.pivots;
  return r;
}

}  // namespace ftaplab
