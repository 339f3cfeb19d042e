#pragma once

#include <string>
#include <vector>

#include "certiq/anneal.hpp"
#include "certiq/solve.hpp"

namespace certiq {

enum class CutKind { kOptimality, kFeasibility };

// Optimality:  theta >= constant + coef . beta
// Feasibility: constant + coef . beta <= 0
struct BendersCut {
  CutKind kind = CutKind::kOptimality;
  double constant = 0.0;
  Vector coef;
  Vector origin;  // beta that generated the cut

  double value(const Vector& beta) const { return constant + coef.dot(beta); }
};

struct SubproblemResult {
  LpSolution lp;
  BendersCut cut;
  bool feasible = false;
  double value = 0.0;  // SP(beta) including the objective offset
};

// Solves SP(beta) and derives the cut from its duals or Farkas ray. Throws
// InvariantError if the cut fails its validity check at beta.
SubproblemResult subproblem(const MixedConstraintSystem& sys, const Vector& beta);

enum class MasterMode { kExhaustive, kAnneal };

struct MasterProblem {
  int num_binary = 0;
  std::vector<std::vector<int>> onehot_groups;
  double theta_floor = 0.0;    // objective lower bound over the boxes
  double theta_ceiling = 0.0;  // encoding range cap for anneal mode
};

struct MasterResult {
  bool feasible = false;
  Vector beta;
  double theta = 0.0;  // exact max over cuts at beta (and the floor)
  bool certified = false;  // theta is the master optimum, hence a lower bound
};

struct MasterOptions {
  MasterMode mode = MasterMode::kExhaustive;
  AnnealConfig anneal;
  int theta_bits = 8;
  int slack_bits = 6;
};

// Exact value of the master objective at beta; +inf if a feasibility cut
// excludes it.
double master_value(const MasterProblem& mp, const std::vector<BendersCut>& cuts, const Vector& beta);

MasterResult solve_master(const MasterProblem& mp, const std::vector<BendersCut>& cuts,
                          const MasterOptions& options = {});

struct BendersOptions {
  double tol = 1e-6;
  int max_iter = 10000;
  MasterOptions master;
  double budget_ms = 0.0;
  // Anneal mode only: exhaustive master checks are allowed up to this many
  // one-hot assignments.
  std::size_t exhaustive_limit = std::size_t{1} << 20;
};

struct BendersStep {
  int iteration = 0;
  Vector beta;
  double lower = 0.0;
  double upper = 0.0;
  BendersCut cut;
  bool has_cut = false;
  bool master_certified = false;
};

enum class BendersStatus { kOptimal, kInfeasible, kIncomplete };

struct BendersResult {
  BendersStatus status = BendersStatus::kIncomplete;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  Vector y;
  Vector beta;
  int iterations = 0;
  std::vector<BendersCut> cuts;
  std::vector<BendersStep> trail;

  double optimum() const { return upper_bound; }
};

BendersResult run_benders(const MixedConstraintSystem& sys, const BendersOptions& options = {});

SystemOptimum to_system_optimum(const BendersResult& r);

std::string trail_to_json(const BendersResult& r);

}  // namespace certiq
