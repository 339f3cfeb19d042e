#pragma once

#include <string>
#include <string_view>

#include "certiq/anneal.hpp"
#include "certiq/benders.hpp"
#include "certiq/qubo.hpp"
#include "certiq/solve.hpp"

namespace certiq {

enum class SolverKind { kEnumerate, kQuboSa, kBenders };

SolverKind parse_solver(std::string_view name);
const char* solver_name(SolverKind kind);

struct SolverSettings {
  SolverKind kind = SolverKind::kBenders;
  double budget_ms = 0.0;
  EnumerateOptions enumerate;
  BendersOptions benders;
  AnnealConfig anneal;
  QuboSettings qubo;
};

// Dispatches to one solver. qubo-sa never reports a certified lower bound:
// its y is the decoded best state and upper_bound its objective, with
// feasible set only when the decoded point satisfies the penalty system
// within one bit resolution per row.
SystemOptimum solve_system(const MixedConstraintSystem& sys, const SolverSettings& settings);

}  // namespace certiq
