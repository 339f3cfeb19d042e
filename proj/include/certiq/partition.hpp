#pragma once

#include <vector>

#include "certiq/encoding.hpp"
#include "certiq/solvers.hpp"

namespace certiq {

struct PartitionReport {
  int cut = 0;
  Box prefix_box;                    // post-activation interval box of layer `cut`
  Verdict verdict = Verdict::kUnknown;  // never kNonrobust
  double lower_bound = 0.0;          // min over targets of certified suffix optima
  std::vector<double> target_bounds;
  int suffix_spins = 0;              // largest suffix QUBO over the targets
  int full_spins = 0;                // same for the unsplit encoding
};

// Interval prefix up to layer `cut`, exact suffix over the prefix box.
// The verdict is robust when every target's certified optimum is positive.
PartitionReport split_verify(const Network& net, const Vector& x0, double eps, int label, int cut,
                             const EncodeOptions& encode, const SolverSettings& solver);

// Largest suffix QUBO dimension over the targets for a given cut; cut 0 is
// the full encoding.
int partition_spins(const Network& net, const Vector& x0, double eps, int label, int cut,
                    const EncodeOptions& encode, const QuboSettings& qubo);

// 0 when the full encoding fits the budget, otherwise the smallest cut whose
// suffix fits.
int suggest_cut(const Network& net, int spin_budget, const Vector& x0, double eps, int label,
                const EncodeOptions& encode, const QuboSettings& qubo);

}  // namespace certiq
