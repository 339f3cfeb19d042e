#pragma once

#include <string>
#include <vector>

#include "certiq/encoding.hpp"
#include "certiq/solvers.hpp"

namespace certiq {

// tau = sum_l (prod_{j>l} |W'_j|_inf) |dW_l|_inf H_{l-1}, with H_0..H_{L-1}
// the activation sup-bounds of the original network on the ball.
double compute_tau(const Network& pruned, const std::vector<Matrix>& residuals, const std::vector<double>& H);
double compute_tau(const PrunedNetwork& pn, const std::vector<double>& H);

enum class TransferVerdict { kCertifiedRobust, kCertifiedNonrobust, kUndecided };

const char* transfer_verdict_name(TransferVerdict v);

struct TransferBounds {
  double lower = 0.0;  // L_f = L_g - 2 tau
  double upper = 0.0;  // U_f = U_g + 2 tau
  TransferVerdict verdict = TransferVerdict::kUndecided;
};

TransferBounds transfer_margin_bounds(double L_g, double U_g, double tau);

struct TransferSample {
  double L_g = 0.0;
  double U_g = 0.0;
  double tau = 0.0;
};

struct DatasetBounds {
  double ca_lower = 0.0;
  double ca_upper = 1.0;
  int certified_robust = 0;
  int certified_nonrobust = 0;
  int total = 0;
};

DatasetBounds dataset_bounds(const std::vector<TransferSample>& samples);

struct TransferCertificate {
  double tau = 0.0;
  double L_g = 0.0;
  double U_g = 0.0;
  TransferBounds bounds;
  bool complete = true;  // every target solved to completion
};

// Bounds the pruned network's robust margin with the chosen solver (min over
// targets of certified lower bounds, min of replayed margins for the upper
// bound) and transfers them to the original network.
TransferCertificate certify_transfer(const Network& net, const PrunedNetwork& pn, const Vector& x0, int label,
                                     double eps, const EncodeOptions& encode, const SolverSettings& solver);

}  // namespace certiq
