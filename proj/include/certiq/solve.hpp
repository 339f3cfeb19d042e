#pragma once

#include <chrono>
#include <cstddef>
#include <limits>

#include "certiq/lp.hpp"
#include "certiq/system.hpp"

namespace certiq {

// Wall-clock limit shared by the solvers; a non-positive budget never expires.
class Deadline {
 public:
  Deadline() = default;
  explicit Deadline(double budget_ms)
      : enabled_(budget_ms > 0.0),
        end_(std::chrono::steady_clock::now() +
             std::chrono::microseconds(static_cast<long long>(budget_ms * 1000.0))) {}

  bool expired() const { return enabled_ && std::chrono::steady_clock::now() >= end_; }

 private:
  bool enabled_ = false;
  std::chrono::steady_clock::time_point end_{};
};

enum class Verdict { kRobust, kNonrobust, kUnknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kRobust: return "robust";
    case Verdict::kNonrobust: return "nonrobust";
    case Verdict::kUnknown: return "unknown";
  }
  return "?";
}

// Outcome of minimising a MixedConstraintSystem. lower_bound is certified;
// upper_bound is the objective of the best feasible (y, beta) found.
struct SystemOptimum {
  bool feasible = false;
  bool complete = false;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  Vector y;
  Vector beta;
  std::size_t lp_solves = 0;
};

// SP(beta): the LP left once beta is fixed. The objective offset is not part
// of the LP.
LpProblem subproblem_lp(const MixedConstraintSystem& sys, const Vector& beta);

// Lower bound of the objective over the column boxes alone.
double box_objective_lower(const MixedConstraintSystem& sys);
double box_objective_upper(const MixedConstraintSystem& sys);

struct EnumerateOptions {
  std::size_t max_assignments = std::size_t{1} << 22;
  double budget_ms = 0.0;
};

// Monolithic reference solver: one LP per one-hot-valid beta.
SystemOptimum solve_enumerate(const MixedConstraintSystem& sys, const EnumerateOptions& options = {});

}  // namespace certiq
