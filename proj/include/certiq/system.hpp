#pragma once

#include <functional>
#include <string>
#include <vector>

#include "certiq/network.hpp"

namespace certiq {

enum class ColumnRole {
  kInput,
  kActivation,     // a^l_j
  kPreActivation,  // z^l_j
  kProduct,        // u^l_{j,i} = beta * z
  kActLower,       // lower activation bound (step-bound model)
  kActUpper,
  kPreLower,
  kPreUpper,
  kAuxiliary,      // anything not tied to a neuron (e.g. the Benders epigraph variable)
};

enum class SelectorFamily { kSingle, kLower, kUpper, kFree };

enum class RowKind { kInput, kPreActivation, kActivation, kOneHot, kSegment, kBigM, kCut, kOther };

struct ColumnInfo {
  ColumnRole role = ColumnRole::kAuxiliary;
  int layer = 0;  // 0 for inputs
  int neuron = 0;
  int segment = -1;
  std::string name() const;
};

struct SelectorInfo {
  SelectorFamily family = SelectorFamily::kFree;
  int layer = 0;
  int neuron = 0;
  int segment = 0;
};

// Column map for the continuous vector y and the binary vector beta, with a
// finite box for every continuous column.
struct VariableLayout {
  std::vector<ColumnInfo> columns;
  std::vector<SelectorInfo> selectors;
  Vector lo;
  Vector hi;
  std::vector<int> input_columns;  // y indices of x, in input order

  int add_column(ColumnInfo info, double lo_bound, double hi_bound);
  int add_selector(SelectorInfo info);
  int num_continuous() const { return static_cast<int>(columns.size()); }
  int num_binary() const { return static_cast<int>(selectors.size()); }
};

// min c~' y + offset  s.t.  A y = b0 + B beta,  C y <= d0 + D beta,
// lo <= y <= hi,  beta binary, exactly one selector per one-hot group.
struct MixedConstraintSystem {
  VariableLayout layout;
  Vector objective;
  double objective_offset = 0.0;
  Matrix A, B;
  Vector b0;
  Matrix C, D;
  Vector d0;
  std::vector<RowKind> eq_kinds;
  std::vector<RowKind> ineq_kinds;
  std::vector<std::vector<int>> onehot_groups;
  int pruned_selectors = 0;  // selectors removed by interval pruning

  int num_continuous() const { return layout.num_continuous(); }
  int num_binary() const { return layout.num_binary(); }
  int num_eq() const { return static_cast<int>(A.rows()); }
  int num_ineq() const { return static_cast<int>(C.rows()); }

  // Checks that every matrix agrees with the layout; throws InvariantError.
  void validate() const;

  Vector input_point(const Vector& y) const;
};

// Incremental builder: rows are appended as sparse (column, coefficient) lists.
class SystemBuilder {
 public:
  struct Term {
    int index;
    double coef;
  };

  VariableLayout& layout() { return layout_; }
  void add_equality(RowKind kind, std::vector<Term> y_terms, double rhs, std::vector<Term> beta_terms);
  void add_inequality(RowKind kind, std::vector<Term> y_terms, double rhs, std::vector<Term> beta_terms);
  void add_onehot(std::vector<int> group);
  void set_objective(std::vector<Term> terms, double offset);
  void set_pruned(int n) { pruned_ = n; }
  MixedConstraintSystem finish() const;

 private:
  struct Row {
    RowKind kind;
    std::vector<Term> y;
    double rhs;
    std::vector<Term> beta;
  };
  VariableLayout layout_;
  std::vector<Row> eq_, ineq_;
  std::vector<std::vector<int>> groups_;
  std::vector<Term> objective_;
  double offset_ = 0.0;
  int pruned_ = 0;
};

struct FeasibilityReport {
  double objective = 0.0;
  double max_violation = 0.0;
};

// Ground-truth residual check shared by all solvers. Covers equalities,
// inequalities, column boxes, one-hot groups and binarity of beta.
FeasibilityReport eval_feasible(const MixedConstraintSystem& sys, const Vector& y, const Vector& beta);

// Enumerates every beta that satisfies the one-hot groups (ungrouped
// selectors range over {0,1}). The callback returns false to stop early.
void for_each_onehot_beta(const MixedConstraintSystem& sys,
                          const std::function<bool(const Vector&)>& fn);
void for_each_onehot_beta(int num_binary, const std::vector<std::vector<int>>& groups,
                          const std::function<bool(const Vector&)>& fn);

std::size_t count_onehot_assignments(const MixedConstraintSystem& sys);
std::size_t count_onehot_assignments(int num_binary, const std::vector<std::vector<int>>& groups);

// True when beta is binary and satisfies every one-hot group.
bool is_onehot_valid(const Vector& beta, const std::vector<std::vector<int>>& groups);

std::string system_to_json(const MixedConstraintSystem& sys);

}  // namespace certiq
