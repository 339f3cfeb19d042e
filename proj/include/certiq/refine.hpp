#pragma once

#include <functional>
#include <vector>

#include "certiq/encoding.hpp"
#include "certiq/solve.hpp"

namespace certiq {

using SystemSolver = std::function<SystemOptimum(const MixedConstraintSystem&)>;

struct RefineStep {
  int segments = 0;
  double lower = 0.0;     // certified lower bound on the pair margin
  double upper = 0.0;     // best replayed pair margin so far
  double gap = 0.0;       // upper - lower
  double step_gap = 0.0;  // widest gamma_hi - gamma_lo over all step tables
};

struct RefineResult {
  MixedConstraintSystem system;  // the last system built
  int segments_used = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  bool complete = false;  // target gap reached
  std::vector<RefineStep> trajectory;
};

// Rebuilds the step-bound system with n = n_start, 2 n_start, ... <= n_max
// (uniform, hence nested, breakpoints) until the gap between the certified
// lower bound and the best replayed margin drops to target_gap. The default
// solver is exhaustive enumeration.
RefineResult refine_until(const Network& net, const PairQuery& query, double target_gap, int n_start, int n_max,
                          Model2Options options = {}, const SystemSolver& solver = {});

}  // namespace certiq
