#pragma once

#include <cstdint>
#include <vector>

#include "certiq/qubo.hpp"

namespace certiq {

struct AnnealConfig {
  int sweeps = 2000;
  int restarts = 20;
  // Non-positive temperatures select the automatic schedule: max |dE| of the
  // starting state down to 1e-3 of that.
  double t_initial = 0.0;
  double t_final = 0.0;
  std::uint64_t seed = 0;
  double budget_ms = 0.0;  // <= 0: unlimited

  void validate() const;
};

struct AnnealResult {
  Bits bits;
  double energy = 0.0;
  std::vector<double> history;  // best energy at the end of each restart
  bool budget_exhausted = false;
  long sweeps_done = 0;
  int best_restart = -1;
};

inline constexpr int kExhaustiveCap = 26;

// Global minimum by Gray-code enumeration; ties keep the first state visited.
AnnealResult solve_exhaustive(const QuboModel& model);

// Single-flip Metropolis with geometric cooling and independent restarts.
AnnealResult solve_sa(const QuboModel& model, const AnnealConfig& cfg = {});

// Energy change of flipping bit i, from scratch.
double flip_delta(const QuboModel& model, const Bits& bits, int i);

}  // namespace certiq
