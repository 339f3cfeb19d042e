#pragma once

#include <span>
#include <vector>

#include "certiq/network.hpp"

namespace certiq {

// Axis-aligned input region. The verification queries use the l-inf ball
// [x0 - eps, x0 + eps]; the layer partition uses an arbitrary prefix box.
struct Box {
  Vector lo;
  Vector hi;

  static Box ball(const Vector& center, double eps);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector clamp(const Vector& x) const;
};

struct IntervalBounds {
  Box input;
  // Index l = 1..L; entry 0 mirrors the input box so a_lo[0] / a_hi[0] are
  // the layer-0 "activations".
  std::vector<Vector> z_lo, z_hi;
  std::vector<Vector> a_lo, a_hi;

  int num_layers() const { return static_cast<int>(z_lo.size()) - 1; }
};

IntervalBounds propagate(const Network& net, const Box& input);
IntervalBounds propagate(const Network& net, const Vector& x0, double eps);

// feasible[i] is false when segment [breakpoints[i], breakpoints[i+1]] cannot
// contain any value of [z_lo, z_hi]. Throws if the interval leaves
// [breakpoints.front(), breakpoints.back()].
std::vector<bool> feasible_segments(double z_lo, double z_hi, std::span<const double> breakpoints);

// H_l = max_j max(|a_lo_j|, |a_hi_j|) for l = 0..L.
std::vector<double> activation_sup_bounds(const IntervalBounds& bounds);

// Sound lower bound on f_label - f_target over the box from the output intervals.
double ibp_pair_margin_lower(const IntervalBounds& bounds, int label, int target);

}  // namespace certiq
