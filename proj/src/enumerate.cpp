#include <algorithm>
#include <string>

#include "certiq/error.hpp"
#include "certiq/solve.hpp"

namespace certiq {

LpProblem subproblem_lp(const MixedConstraintSystem& sys, const Vector& beta) {
  if (beta.size() != sys.num_binary()) throw Error("beta length does not match the system");
  LpProblem lp;
  lp.A = sys.A;
  lp.b = sys.b0 + sys.B * beta;
  lp.C = sys.C;
  lp.d = sys.d0 + sys.D * beta;
  lp.c = sys.objective;
  lp.lo = sys.layout.lo;
  lp.hi = sys.layout.hi;
  return lp;
}

double box_objective_lower(const MixedConstraintSystem& sys) {
  const Vector& c = sys.objective;
  return c.cwiseProduct(sys.layout.lo).cwiseMin(c.cwiseProduct(sys.layout.hi)).sum() + sys.objective_offset;
}

double box_objective_upper(const MixedConstraintSystem& sys) {
  const Vector& c = sys.objective;
  return c.cwiseProduct(sys.layout.lo).cwiseMax(c.cwiseProduct(sys.layout.hi)).sum() + sys.objective_offset;
}

SystemOptimum solve_enumerate(const MixedConstraintSystem& sys, const EnumerateOptions& options) {
  const std::size_t count = count_onehot_assignments(sys);
  if (count > options.max_assignments) {
    throw Error("enumeration needs " + std::to_string(count) + " assignments, over the limit of " +
                std::to_string(options.max_assignments));
  }
  Deadline deadline(options.budget_ms);
  SystemOptimum best;
  best.complete = true;
  for_each_onehot_beta(sys, [&](const Vector& beta) {
    if (deadline.expired()) {
      best.complete = false;
      return false;
    }
    const LpSolution sol = solve_lp(subproblem_lp(sys, beta));
    ++best.lp_solves;
    if (sol.status == LpStatus::kUnbounded) throw InvariantError("subproblem unbounded despite finite boxes");
    if (sol.status != LpStatus::kOptimal) return true;
    const double value = sol.objective + sys.objective_offset;
    if (!best.feasible || value < best.upper_bound) {
      best.feasible = true;
      best.upper_bound = value;
      best.y = sol.y;
      best.beta = beta;
    }
    return true;
  });
  if (best.complete) best.lower_bound = best.upper_bound;
  return best;
}

}  // namespace certiq
