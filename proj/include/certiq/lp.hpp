#pragma once

#include "certiq/network.hpp"

namespace certiq {

// min c'y  s.t.  A y = b,  C y <= d,  lo <= y <= hi.
struct LpProblem {
  Matrix A;
  Vector b;
  Matrix C;
  Vector d;
  Vector c;
  Vector lo;
  Vector hi;

  int num_vars() const { return static_cast<int>(c.size()); }
  // Rows of the folded inequality block [C; I; -I] used by lambda.
  int num_dual_ineq() const { return static_cast<int>(C.rows() + 2 * c.size()); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* lp_status_name(LpStatus s);

// Dual convention: the box is folded into the inequality block as
// [C; I; -I] y <= [d; hi; -lo] and lambda >= 0 holds one multiplier per row
// in that order. Optimal duals satisfy
//   A'pi - [C; I; -I]' lambda = c,   dual value b'pi - [d; hi; -lo]' lambda.
// An infeasibility ray satisfies A'pi - [C; I; -I]' lambda = 0 with
// b'pi - [d; hi; -lo]' lambda = 1.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector y;
  Vector pi;
  Vector lambda;
  Vector ray_pi;
  Vector ray_lambda;
  double objective = 0.0;
  int iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-7;
  double pivot_tol = 1e-10;
  double optimality_tol = 1e-9;
  int refactor_every = 64;
  int degenerate_limit = 32;  // consecutive degenerate pivots before Bland's rule
};

LpSolution solve_lp(const LpProblem& lp, const LpOptions& options = {});

// Recomputes primal feasibility, dual feasibility, complementary slackness
// and the duality gap from scratch and returns the largest residual. For an
// infeasible status it checks the Farkas ray instead.
double check_kkt(const LpSolution& sol, const LpProblem& lp);

// Folded right-hand side [d; hi; -lo].
Vector folded_rhs(const LpProblem& lp);

}  // namespace certiq
