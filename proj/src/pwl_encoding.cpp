#include <algorithm>
#include <cmath>

#include "certiq/encoding.hpp"
#include "certiq/error.hpp"

namespace certiq {

bool is_degenerate(double lo, double hi) {
  return hi - lo <= kDegenerateWidth * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
}

namespace {

// Kinks of each piecewise-linear activation.
std::vector<double> kinks(Activation act) {
  switch (act) {
    case Activation::kRelu: return {0.0};
    case Activation::kHardTanh: return {-1.0, 1.0};
    case Activation::kIdentity: return {};
    default: throw Error("activation '" + std::string(activation_name(act)) +
                         "' is not piecewise-linear; use the step-bound model");
  }
}

// (alpha, gamma) of the linear piece containing z.
std::pair<double, double> piece_at(Activation act, double z) {
  switch (act) {
    case Activation::kRelu: return z >= 0.0 ? std::pair{1.0, 0.0} : std::pair{0.0, 0.0};
    case Activation::kHardTanh:
      if (z <= -1.0) return {0.0, -1.0};
      if (z >= 1.0) return {0.0, 1.0};
      return {1.0, 0.0};
    default: return {1.0, 0.0};
  }
}

}  // namespace

SegmentTable SegmentTable::from_breakpoints(Activation act, std::vector<double> breakpoints) {
  const std::vector<double> k = kinks(act);
  if (breakpoints.size() < 2) throw Error("segment table needs at least two breakpoints");
  SegmentTable t;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double lo = breakpoints[i];
    double hi = breakpoints[i + 1];
    if (!(hi > lo)) throw Error("segment breakpoints must be strictly increasing");
    for (double kink : k) {
      if (kink > lo && kink < hi) {
        throw Error("segment [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "] straddles an activation kink");
      }
    }
    auto [alpha, gamma] = piece_at(act, 0.5 * (lo + hi));
    t.slope.push_back(alpha);
    t.intercept.push_back(gamma);
  }
  t.breakpoints = std::move(breakpoints);
  return t;
}

SegmentTable build_segment_table_pwl(Activation act, double z_lo, double z_hi) {
  if (!(z_lo < z_hi)) {
    throw Error("degenerate interval: fold the neuron into a constant instead of tabulating it");
  }
  std::vector<double> bps{z_lo};
  for (double kink : kinks(act)) {
    if (kink > z_lo && kink < z_hi) bps.push_back(kink);
  }
  bps.push_back(z_hi);
  return SegmentTable::from_breakpoints(act, std::move(bps));
}

PwlTables default_pwl_tables(const Network& net, const IntervalBounds& bounds) {
  PwlTables tables(net.num_layers());
  for (int l = 1; l <= net.num_layers(); ++l) {
    const Activation act = net.layer(l - 1).activation;
    for (int j = 0; j < net.layer(l - 1).out_dim(); ++j) {
      double lo = bounds.z_lo[l][j];
      double hi = bounds.z_hi[l][j];
      tables[l - 1].push_back(is_degenerate(lo, hi) ? SegmentTable{}
                                                    : build_segment_table_pwl(act, lo, hi));
    }
  }
  return tables;
}

namespace {

void check_query(const Network& net, const PairQuery& q, const IntervalBounds& bounds) {
  const int k = net.output_dim();
  if (q.label < 0 || q.label >= k || q.target < 0 || q.target >= k) {
    throw Error("class index out of range");
  }
  if (q.label == q.target) throw Error("target class must differ from the true label");
  if (q.input.dim() != net.input_dim()) throw Error("query box dimension does not match the network");
  if (bounds.num_layers() != net.num_layers()) throw Error("interval bounds missing for some layers");
}

// Either a y column or a folded constant.
struct Slot {
  int column = -1;
  double value = 0.0;
  bool is_const() const { return column < 0; }
};

struct Segment {
  double lo, hi, alpha, gamma;
};

}  // namespace

MixedConstraintSystem build_model1(const Network& net, const PairQuery& query, const PwlTables& tables,
                                   const IntervalBounds& bounds, Model1Options options) {
  check_query(net, query, bounds);
  if (static_cast<int>(tables.size()) != net.num_layers()) throw Error("one segment table list per layer required");
  for (int l = 0; l < net.num_layers(); ++l) {
    if (!is_piecewise_linear(net.layer(l).activation)) {
      throw Error("model 1 requires piecewise-linear activations");
    }
  }

  SystemBuilder sb;
  VariableLayout& lay = sb.layout();
  const int n0 = net.input_dim();

  std::vector<Slot> prev(n0);
  for (int i = 0; i < n0; ++i) {
    prev[i].column = lay.add_column({ColumnRole::kInput, 0, i, -1}, query.input.lo[i], query.input.hi[i]);
    sb.add_inequality(RowKind::kInput, {{prev[i].column, 1.0}}, query.input.hi[i], {});
  }
  for (int i = 0; i < n0; ++i) {
    sb.add_inequality(RowKind::kInput, {{prev[i].column, -1.0}}, -query.input.lo[i], {});
  }

  int pruned = 0;
  for (int l = 1; l <= net.num_layers(); ++l) {
    const Layer& layer = net.layer(l - 1);
    const int nl = layer.out_dim();
    if (static_cast<int>(tables[l - 1].size()) != nl) throw Error("segment table count mismatch at layer " + std::to_string(l));

    std::vector<Slot> act(nl), pre(nl);
    std::vector<std::vector<int>> prod(nl), sel(nl);
    std::vector<std::vector<Segment>> kept(nl);

    // Columns: a^l, z^l, u^l in that order.
    for (int j = 0; j < nl; ++j) {
      const double zl = bounds.z_lo[l][j];
      const double zh = bounds.z_hi[l][j];
      if (tables[l - 1][j].empty() || is_degenerate(zl, zh)) {
        pre[j].value = 0.5 * (zl + zh);
        act[j].value = apply_activation(layer.activation, pre[j].value);
        continue;
      }
      act[j].column = lay.add_column({ColumnRole::kActivation, l, j, -1}, bounds.a_lo[l][j], bounds.a_hi[l][j]);
    }
    for (int j = 0; j < nl; ++j) {
      if (act[j].is_const()) continue;
      pre[j].column = lay.add_column({ColumnRole::kPreActivation, l, j, -1}, bounds.z_lo[l][j], bounds.z_hi[l][j]);
    }
    for (int j = 0; j < nl; ++j) {
      if (act[j].is_const()) continue;
      const double zl = bounds.z_lo[l][j];
      const double zh = bounds.z_hi[l][j];
      const SegmentTable& full = tables[l - 1][j];
      std::vector<bool> feasible(full.num_segments(), true);
      if (options.prune_segments) feasible = feasible_segments(zl, zh, full.breakpoints);
      for (int i = 0; i < full.num_segments(); ++i) {
        if (!feasible[i]) {
          ++pruned;
          continue;
        }
        kept[j].push_back({full.breakpoints[i], full.breakpoints[i + 1], full.slope[i], full.intercept[i]});
      }
      for (int i = 0; i < static_cast<int>(kept[j].size()); ++i) {
        prod[j].push_back(lay.add_column({ColumnRole::kProduct, l, j, i}, std::min(0.0, zl), std::max(0.0, zh)));
      }
    }
    for (int j = 0; j < nl; ++j) {
      for (std::size_t i = 0; i < kept[j].size(); ++i) {
        sel[j].push_back(lay.add_selector({SelectorFamily::kSingle, l, j, static_cast<int>(i)}));
      }
    }

    // z^l - W a^{l-1} = b
    for (int j = 0; j < nl; ++j) {
      if (pre[j].is_const()) continue;
      std::vector<SystemBuilder::Term> terms{{pre[j].column, 1.0}};
      double rhs = layer.bias[j];
      for (int k = 0; k < layer.in_dim(); ++k) {
        const double w = layer.weights(j, k);
        if (w == 0.0) continue;
        if (prev[k].is_const()) rhs += w * prev[k].value;
        else terms.push_back({prev[k].column, -w});
      }
      sb.add_equality(RowKind::kPreActivation, std::move(terms), rhs, {});
    }
    // a^l = sum_i alpha_i u_i + gamma_i beta_i
    for (int j = 0; j < nl; ++j) {
      if (act[j].is_const()) continue;
      std::vector<SystemBuilder::Term> y{{act[j].column, 1.0}};
      std::vector<SystemBuilder::Term> b;
      for (std::size_t i = 0; i < kept[j].size(); ++i) {
        if (kept[j][i].alpha != 0.0) y.push_back({prod[j][i], -kept[j][i].alpha});
        if (kept[j][i].gamma != 0.0) b.push_back({sel[j][i], kept[j][i].gamma});
      }
      sb.add_equality(RowKind::kActivation, std::move(y), 0.0, std::move(b));
    }
    for (int j = 0; j < nl; ++j) {
      if (!act[j].is_const()) sb.add_onehot(sel[j]);
    }
    // sum_i M_{i-1} beta_i <= z <= sum_i M_i beta_i
    for (int j = 0; j < nl; ++j) {
      if (act[j].is_const()) continue;
      std::vector<SystemBuilder::Term> lower, upper;
      for (std::size_t i = 0; i < kept[j].size(); ++i) {
        lower.push_back({sel[j][i], -kept[j][i].lo});
        upper.push_back({sel[j][i], kept[j][i].hi});
      }
      sb.add_inequality(RowKind::kSegment, {{pre[j].column, -1.0}}, 0.0, std::move(lower));
      sb.add_inequality(RowKind::kSegment, {{pre[j].column, 1.0}}, 0.0, std::move(upper));
    }
    // big-M rows for u = beta * z with M_lo = z_lo, M_hi = z_hi
    for (int j = 0; j < nl; ++j) {
      if (act[j].is_const()) continue;
      const double mlo = bounds.z_lo[l][j];
      const double mhi = bounds.z_hi[l][j];
      const int z = pre[j].column;
      for (std::size_t i = 0; i < kept[j].size(); ++i) {
        const int u = prod[j][i];
        const int s = sel[j][i];
        sb.add_inequality(RowKind::kBigM, {{u, 1.0}}, 0.0, {{s, mhi}});
        sb.add_inequality(RowKind::kBigM, {{u, -1.0}}, 0.0, {{s, -mlo}});
        sb.add_inequality(RowKind::kBigM, {{u, 1.0}, {z, -1.0}}, -mlo, {{s, mlo}});
        sb.add_inequality(RowKind::kBigM, {{u, -1.0}, {z, 1.0}}, mhi, {{s, -mhi}});
      }
    }
    prev = act;
  }

  std::vector<SystemBuilder::Term> obj;
  double offset = 0.0;
  auto add_obj = [&](const Slot& s, double coef) {
    if (s.is_const()) offset += coef * s.value;
    else obj.push_back({s.column, coef});
  };
  add_obj(prev[query.label], 1.0);
  add_obj(prev[query.target], -1.0);
  sb.set_objective(std::move(obj), offset);
  sb.set_pruned(pruned);
  return sb.finish();
}

MixedConstraintSystem build_model1(const Network& net, const PairQuery& query, Model1Options options) {
  IntervalBounds bounds = propagate(net, query.input);
  return build_model1(net, query, default_pwl_tables(net, bounds), bounds, options);
}

}  // namespace certiq
