#include "certiq/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "certiq/error.hpp"

namespace certiq {

RefineResult refine_until(const Network& net, const PairQuery& query, double target_gap, int n_start, int n_max,
                          Model2Options options, const SystemSolver& solver) {
  if (!(target_gap > 0.0)) throw Error("target gap must be positive");
  if (n_start < 1 || n_max < n_start) throw Error("need 1 <= n_start <= n_max");
  const SystemSolver solve = solver ? solver : [](const MixedConstraintSystem& s) { return solve_enumerate(s); };
  const IntervalBounds bounds = propagate(net, query.input);

  RefineResult res;
  const Vector center = 0.5 * (query.input.lo + query.input.hi);
  res.upper_bound = pair_margin(forward_eval(net, center), query.label, query.target);
  res.lower_bound = -std::numeric_limits<double>::infinity();
  for (int n = n_start; n <= n_max; n *= 2) {
    const StepTables tables = default_step_tables(net, bounds, n);
    res.system = build_model2(net, query, tables, bounds, options);
    const SystemOptimum opt = solve(res.system);
    if (!opt.feasible) throw InvariantError("step-bound system infeasible although the ball is not empty");
    res.lower_bound = std::max(res.lower_bound, opt.lower_bound);
    if (opt.y.size() > 0) {
      const Vector x = query.input.clamp(res.system.input_point(opt.y));
      res.upper_bound = std::min(res.upper_bound, pair_margin(forward_eval(net, x), query.label, query.target));
    }
    RefineStep step;
    step.segments = n;
    step.lower = res.lower_bound;
    step.upper = res.upper_bound;
    step.gap = res.upper_bound - res.lower_bound;
    for (const auto& layer : tables) {
      for (const StepBoundTable& t : layer) step.step_gap = std::max(step.step_gap, t.max_gap());
    }
    res.trajectory.push_back(step);
    res.segments_used = n;
    res.gap = step.gap;
    if (res.gap <= target_gap) {
      res.complete = true;
      break;
    }
    if (n > n_max / 2) break;
  }
  return res;
}

}  // namespace certiq
