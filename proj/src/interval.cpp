#include "certiq/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "certiq/error.hpp"

namespace certiq {

Box Box::ball(const Vector& center, double eps) {
  if (eps < 0.0) throw Error("eps must be non-negative");
  return {(center.array() - eps).matrix(), (center.array() + eps).matrix()};
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

IntervalBounds propagate(const Network& net, const Box& input) {
  if (input.dim() != net.input_dim()) {
    throw Error("input box has dimension " + std::to_string(input.dim()) + ", network expects " +
                std::to_string(net.input_dim()));
  }
  const int L = net.num_layers();
  IntervalBounds b;
  b.input = input;
  b.z_lo.resize(L + 1);
  b.z_hi.resize(L + 1);
  b.a_lo.resize(L + 1);
  b.a_hi.resize(L + 1);
  b.z_lo[0] = b.a_lo[0] = input.lo;
  b.z_hi[0] = b.a_hi[0] = input.hi;
  for (int l = 1; l <= L; ++l) {
    const Layer& layer = net.layer(l - 1);
    Matrix pos = layer.weights.cwiseMax(0.0);
    Matrix neg = layer.weights.cwiseMin(0.0);
    b.z_lo[l] = pos * b.a_lo[l - 1] + neg * b.a_hi[l - 1] + layer.bias;
    b.z_hi[l] = pos * b.a_hi[l - 1] + neg * b.a_lo[l - 1] + layer.bias;
    // every supported activation is monotone non-decreasing
    b.a_lo[l] = b.z_lo[l].unaryExpr([&](double z) { return apply_activation(layer.activation, z); });
    b.a_hi[l] = b.z_hi[l].unaryExpr([&](double z) { return apply_activation(layer.activation, z); });
  }
  return b;
}

IntervalBounds propagate(const Network& net, const Vector& x0, double eps) {
  return propagate(net, Box::ball(x0, eps));
}

std::vector<bool> feasible_segments(double z_lo, double z_hi, std::span<const double> breakpoints) {
  if (breakpoints.size() < 2) throw Error("segment table needs at least two breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw Error("segment breakpoints must be strictly increasing");
    }
  }
  const double scale = 1e-9 * std::max(1.0, std::max(std::abs(z_lo), std::abs(z_hi)));
  if (z_lo < breakpoints.front() - scale || z_hi > breakpoints.back() + scale) {
    std::ostringstream msg;
    msg << "interval [" << z_lo << ", " << z_hi << "] escapes the segment table ["
        << breakpoints.front() << ", " << breakpoints.back()
        << "]; widen the outermost breakpoints";
    throw Error(msg.str());
  }
  std::vector<bool> feasible(breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    feasible[i] = !(z_hi < breakpoints[i] || z_lo > breakpoints[i + 1]);
  }
  return feasible;
}

std::vector<double> activation_sup_bounds(const IntervalBounds& bounds) {
  std::vector<double> h;
  for (std::size_t l = 0; l < bounds.a_lo.size(); ++l) {
    double m = 0.0;
    if (bounds.a_lo[l].size() > 0) {
      m = std::max(bounds.a_lo[l].cwiseAbs().maxCoeff(), bounds.a_hi[l].cwiseAbs().maxCoeff());
    }
    h.push_back(m);
  }
  return h;
}

double ibp_pair_margin_lower(const IntervalBounds& bounds, int label, int target) {
  const Vector& lo = bounds.a_lo.back();
  const Vector& hi = bounds.a_hi.back();
  return lo[label] - hi[target];
}

}  // namespace certiq
