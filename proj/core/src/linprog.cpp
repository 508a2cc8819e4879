#include "ftaplab/linprog.hpp"

#include <cmath>
#include <stdexcept>

#include "simplex_impl.hpp"

namespace ftaplab {

void LinearProgram::add_eq(std::vector<double> row, double rhs) {
  eq_A.push_back(std::move(row));
  eq_b.push_back(rhs);
}

void LinearProgram::add_ineq(std::vector<double> row, double rhs) {
  ineq_A.push_back(std::move(row));
  ineq_b.push_back(rhs);
}

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  if (n == 0) throw std::invalid_argument("linear program has no variables");
  if (eq_A.size() != eq_b.size() || ineq_A.size() != ineq_b.size())
    throw std::invalid_argument("constraint matrix/rhs size mismatch");
  for (const auto& r : eq_A)
    if (r.size() != n) throw std::invalid_argument("equality row width mismatch");
  for (const auto& r : ineq_A)
    if (r.size() != n) throw std::invalid_argument("inequality row width mismatch");
  for (double b : eq_b)
    if (std::isnan(b) || std::isinf(b)) throw std::invalid_argument("equality rhs must be finite");
  for (double b : ineq_b)
    if (std::isnan(b) || std::isinf(b))
      throw std::invalid_argument("inequality rhs must be finite");
  if (!lower.empty() && lower.size() != n)
    throw std::invalid_argument("lower bound vector width mismatch");
  if (!upper.empty() && upper.size() != n)
    throw std::invalid_argument("upper bound vector width mismatch");
}

LpResult lp_solve(const LinearProgram& lp) {
  auto g = detail::solve_general<double>(lp, 1e-9);
  LpResult r;
  r.status = g.status;
  r.x = std::move(g.x);
  r.objective = g.objective;
  r.pivots = g.pivots;
  r.degenerate = g.degenerate;
  r.condition = g.growth;
  return r;
}

}  // namespace ftaplab
