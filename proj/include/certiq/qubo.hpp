#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "certiq/system.hpp"

namespace certiq {

using Bits = std::vector<std::uint8_t>;

// Binary expansion of every continuous column (y = lo + sum_k t_k z_k) and of
// one slack per encoded inequality row (s = sum_k t_k z_k, 0 <= s <= upper).
struct BitEncoding {
  Vector y_lo;
  std::vector<std::vector<double>> y_weights;
  std::vector<int> slack_rows;  // inequality rows carried into the QUBO
  Vector slack_hi;              // per encoded row
  std::vector<std::vector<double>> slack_weights;
  std::vector<int> dropped_rows;  // rows never violated over the box

  int y_bits() const;
  int slack_bits() const;
  // Smallest positive bit weight; 0 when nothing is encoded.
  double resolution() const;
};

struct EncodingOptions {
  // Drop inequality rows whose slack is non-negative everywhere on the box.
  bool drop_vacuous_rows = false;
};

BitEncoding make_encoding(const MixedConstraintSystem& sys, int bits_per_var, int bits_per_slack,
                          EncodingOptions options = {});

// Number of binary variables of the QUBO for this encoding: y bits + slack
// bits + selectors.
int qubo_dimension(const MixedConstraintSystem& sys, const BitEncoding& enc);

// Encoding parameters used by the verification pipeline.
struct QuboSettings {
  int bits_per_var = 4;
  int bits_per_slack = 4;
  bool drop_vacuous_rows = true;
};

int spin_count(const MixedConstraintSystem& sys, const QuboSettings& settings);

// energy(x) = x'Qx + q'x + constant over x in {0,1}^n.
struct QuboModel {
  Matrix Q;
  Vector q;
  double constant = 0.0;

  int dim() const { return static_cast<int>(q.size()); }
};

struct QuboInstance {
  QuboModel model;
  double rho = 1.0;
  BitEncoding encoding;
  VariableLayout layout;
  Vector objective;
  double objective_offset = 0.0;
  // Penalty system M x = r over x = [y bits, slack bits, beta].
  Matrix M_eq;
  Vector r_eq;
  std::vector<std::vector<int>> onehot_groups;

  int dim() const { return model.dim(); }
  int y_offset() const { return 0; }
  int slack_offset() const { return encoding.y_bits(); }
  int beta_offset() const { return encoding.y_bits() + encoding.slack_bits(); }
};

// Blocks [[A T_y, 0, -B], [C T_y, T_s, -D]] and right-hand side
// [b0 - A lo; d0 - C lo], restricted to the encoded inequality rows.
Matrix penalty_matrix(const MixedConstraintSystem& sys, const BitEncoding& enc);
Vector penalty_rhs(const MixedConstraintSystem& sys, const BitEncoding& enc);

QuboInstance assemble(const MixedConstraintSystem& sys, const BitEncoding& enc, double rho);

// 2 * |c|_1 * (largest column range) / resolution^2 + 1, or 1 for a zero objective.
double choose_rho(const MixedConstraintSystem& sys, const BitEncoding& enc);

struct Decoded {
  Vector y;
  Vector beta;
  Vector slack;
  double residual = 0.0;  // |M x - r|_inf
  double objective = 0.0;
};

Decoded decode(const QuboInstance& inst, const Bits& bits);

// Nearest bit pattern for a given point (greedy from the largest weight).
Bits encode_point(const QuboInstance& inst, const Vector& y, const Vector& beta, const Vector& slack);

double energy(const QuboModel& model, const Bits& bits);

// Header comments, then 0-based "i j value" for i <= j. Diagonal entries hold
// Q_ii + q_i and off-diagonal entries 2 Q_ij, so the listed coefficients
// define the same energy.
void write_qubo(const QuboInstance& inst, std::ostream& out);
void write_qubo(const QuboModel& model, double rho, std::ostream& out);
QuboModel read_qubo(std::istream& in);

}  // namespace certiq
