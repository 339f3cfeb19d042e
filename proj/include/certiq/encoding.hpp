#pragma once

#include <vector>

#include "certiq/interval.hpp"
#include "certiq/network.hpp"
#include "certiq/system.hpp"

namespace certiq {

// One robustness sub-query: minimise f_label(x) - f_target(x) over the box.
struct PairQuery {
  Box input;
  int label = 0;
  int target = 1;
};

// Neurons whose interval collapses to a point are folded into constants.
inline constexpr double kDegenerateWidth = 1e-12;
bool is_degenerate(double lo, double hi);

// ---------------------------------------------------------------------------
// Exact piecewise-linear encoding (big-M products, one selector per segment).

struct SegmentTable {
  std::vector<double> breakpoints;  // M_0 < ... < M_n
  std::vector<double> slope;        // alpha_i for segment i
  std::vector<double> intercept;    // gamma_i

  int num_segments() const { return static_cast<int>(slope.size()); }
  bool empty() const { return slope.empty(); }

  // Exact slopes/intercepts for a piecewise-linear activation. Each segment
  // must lie inside one linear piece of the activation.
  static SegmentTable from_breakpoints(Activation act, std::vector<double> breakpoints);
};

// Minimal exact table over [z_lo, z_hi]: relu splits at 0, hardtanh at -1 and 1.
SegmentTable build_segment_table_pwl(Activation act, double z_lo, double z_hi);

// tables[l-1][j] for layers l = 1..L; an empty table marks a folded neuron.
using PwlTables = std::vector<std::vector<SegmentTable>>;
PwlTables default_pwl_tables(const Network& net, const IntervalBounds& bounds);

struct Model1Options {
  bool prune_segments = true;
};

MixedConstraintSystem build_model1(const Network& net, const PairQuery& query, const PwlTables& tables,
                                   const IntervalBounds& bounds, Model1Options options = {});

// Convenience: IBP bounds and minimal tables computed internally.
MixedConstraintSystem build_model1(const Network& net, const PairQuery& query,
                                   Model1Options options = {});

// ---------------------------------------------------------------------------
// Step-bound over-approximation for monotone activations.

struct StepBoundTable {
  std::vector<double> breakpoints;
  std::vector<double> lower;  // inf of sigma on segment i
  std::vector<double> upper;  // sup of sigma on segment i

  int num_segments() const { return static_cast<int>(lower.size()); }
  bool empty() const { return lower.empty(); }
  double max_gap() const;
};

StepBoundTable build_step_table(Activation act, double z_lo, double z_hi, int n_segments);

// tables[l-1][j] for hidden layers l = 1..L-1; logits are encoded exactly.
using StepTables = std::vector<std::vector<StepBoundTable>>;
StepTables default_step_tables(const Network& net, const IntervalBounds& bounds, int n_segments);

struct Model2Options {
  bool one_sided = false;
  bool prune_segments = true;
};

MixedConstraintSystem build_model2(const Network& net, const PairQuery& query, const StepTables& tables,
                                   const IntervalBounds& bounds, Model2Options options = {});

MixedConstraintSystem build_model2(const Network& net, const PairQuery& query, int n_segments,
                                   Model2Options options = {});

// Model selection used by the verification pipeline.
struct EncodeOptions {
  int model = 1;
  int segments = 4;  // model 2 only
  bool one_sided = false;
};

MixedConstraintSystem build_pair_system(const Network& net, const PairQuery& query, const EncodeOptions& options);

}  // namespace certiq
