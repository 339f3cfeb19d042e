#include <algorithm>
#include <array>
#include <cmath>

#include "certiq/encoding.hpp"
#include "certiq/error.hpp"

namespace certiq {

double StepBoundTable::max_gap() const {
  double g = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) g = std::max(g, upper[i] - lower[i]);
  return g;
}

StepBoundTable build_step_table(Activation act, double z_lo, double z_hi, int n_segments) {
  if (n_segments < 1) throw Error("step table needs at least one segment");
  if (!(z_lo < z_hi)) throw Error("step table needs z_lo < z_hi");
  // All supported activations are monotone non-decreasing, so the extremes on
  // a segment sit at its endpoints.
  StepBoundTable t;
  t.breakpoints.resize(n_segments + 1);
  const double width = (z_hi - z_lo) / n_segments;
  for (int i = 0; i <= n_segments; ++i) t.breakpoints[i] = z_lo + width * i;
  t.breakpoints.back() = z_hi;
  for (int i = 0; i < n_segments; ++i) {
    t.lower.push_back(apply_activation(act, t.breakpoints[i]));
    t.upper.push_back(apply_activation(act, t.breakpoints[i + 1]));
  }
  return t;
}

StepTables default_step_tables(const Network& net, const IntervalBounds& bounds, int n_segments) {
  StepTables tables(std::max(0, net.num_layers() - 1));
  for (int l = 1; l < net.num_layers(); ++l) {
    const Activation act = net.layer(l - 1).activation;
    for (int j = 0; j < net.layer(l - 1).out_dim(); ++j) {
      const double lo = bounds.z_lo[l][j];
      const double hi = bounds.z_hi[l][j];
      tables[l - 1].push_back(is_degenerate(lo, hi) ? StepBoundTable{}
                                                    : build_step_table(act, lo, hi, n_segments));
    }
  }
  return tables;
}

namespace {

struct Slot {
  int column = -1;
  double value = 0.0;
  bool is_const() const { return column < 0; }
};

// Lower and upper family of one neuron.
struct Pair {
  Slot lo, hi;
};

}  // namespace

MixedConstraintSystem build_model2(const Network& net, const PairQuery& query, const StepTables& tables,
                                   const IntervalBounds& bounds, Model2Options options) {
  const int L = net.num_layers();
  const int K = net.output_dim();
  if (query.label < 0 || query.label >= K || query.target < 0 || query.target >= K) {
    throw Error("class index out of range");
  }
  if (query.label == query.target) throw Error("target class must differ from the true label");
  if (query.input.dim() != net.input_dim()) throw Error("query box dimension does not match the network");
  if (bounds.num_layers() != L) throw Error("interval bounds missing for some layers");
  if (static_cast<int>(tables.size()) != L - 1) throw Error("one step table list per hidden layer required");

  // need[l][j] = {lower family needed, upper family needed}
  std::vector<std::vector<std::array<bool, 2>>> need(L + 1);
  for (int l = 0; l <= L; ++l) {
    const int n = l == 0 ? net.input_dim() : net.layer(l - 1).out_dim();
    need[l].assign(n, {!options.one_sided, !options.one_sided});
  }
  if (options.one_sided) {
    need[L][query.label][0] = true;
    need[L][query.target][1] = true;
    for (int l = L; l >= 2; --l) {
      const Matrix& W = net.layer(l - 1).weights;
      for (int j = 0; j < W.rows(); ++j) {
        for (int k = 0; k < W.cols(); ++k) {
          const double w = W(j, k);
          if (w == 0.0) continue;
          // z_lo uses a_lo for positive and a_hi for negative weights; z_hi the reverse
          if (need[l][j][0]) need[l - 1][k][w > 0.0 ? 0 : 1] = true;
          if (need[l][j][1]) need[l - 1][k][w > 0.0 ? 1 : 0] = true;
        }
      }
    }
  }

  SystemBuilder sb;
  VariableLayout& lay = sb.layout();
  const int n0 = net.input_dim();
  std::vector<Pair> prev(n0);
  for (int i = 0; i < n0; ++i) {
    int c = lay.add_column({ColumnRole::kInput, 0, i, -1}, query.input.lo[i], query.input.hi[i]);
    prev[i].lo.column = prev[i].hi.column = c;
    sb.add_inequality(RowKind::kInput, {{c, 1.0}}, query.input.hi[i], {});
  }
  for (int i = 0; i < n0; ++i) {
    sb.add_inequality(RowKind::kInput, {{prev[i].lo.column, -1.0}}, -query.input.lo[i], {});
  }

  int pruned = 0;
  for (int l = 1; l <= L; ++l) {
    const Layer& layer = net.layer(l - 1);
    const int nl = layer.out_dim();
    const bool logits = l == L;
    if (!logits && static_cast<int>(tables[l - 1].size()) != nl) {
      throw Error("step table count mismatch at layer " + std::to_string(l));
    }
    std::vector<Pair> act(nl), pre(nl);
    std::vector<bool> folded(nl, false);
    for (int j = 0; j < nl; ++j) {
      const double zl = bounds.z_lo[l][j];
      const double zh = bounds.z_hi[l][j];
      if (is_degenerate(zl, zh) || (!logits && tables[l - 1][j].empty())) {
        folded[j] = true;
        const double z = 0.5 * (zl + zh);
        pre[j].lo.value = pre[j].hi.value = z;
        act[j].lo.value = act[j].hi.value = apply_activation(layer.activation, z);
      }
    }
    // Columns a_lo, a_hi, z_lo, z_hi (only for needed families).
    for (int f = 0; f < 2; ++f) {
      for (int j = 0; j < nl; ++j) {
        if (folded[j] || !need[l][j][f]) continue;
        Slot& s = f == 0 ? act[j].lo : act[j].hi;
        s.column = lay.add_column({f == 0 ? ColumnRole::kActLower : ColumnRole::kActUpper, l, j, -1},
                                  bounds.a_lo[l][j], bounds.a_hi[l][j]);
      }
    }
    for (int f = 0; f < 2; ++f) {
      for (int j = 0; j < nl; ++j) {
        if (folded[j] || !need[l][j][f]) continue;
        Slot& s = f == 0 ? pre[j].lo : pre[j].hi;
        s.column = lay.add_column({f == 0 ? ColumnRole::kPreLower : ColumnRole::kPreUpper, l, j, -1},
                                  bounds.z_lo[l][j], bounds.z_hi[l][j]);
      }
    }

    // Pre-activation bounds with sign-split weights.
    for (int f = 0; f < 2; ++f) {
      for (int j = 0; j < nl; ++j) {
        const Slot& z = f == 0 ? pre[j].lo : pre[j].hi;
        if (z.is_const()) continue;
        std::vector<SystemBuilder::Term> terms{{z.column, 1.0}};
        double rhs = layer.bias[j];
        for (int k = 0; k < layer.in_dim(); ++k) {
          const double w = layer.weights(j, k);
          if (w == 0.0) continue;
          const bool use_lower = (f == 0) == (w > 0.0);
          const Slot& a = use_lower ? prev[k].lo : prev[k].hi;
          if (a.is_const()) rhs += w * a.value;
          else terms.push_back({a.column, -w});
        }
        sb.add_equality(RowKind::kPreActivation, std::move(terms), rhs, {});
      }
    }

    if (logits) {
      // identity on the logits: a = z exactly, no selectors
      for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < nl; ++j) {
          const Slot& a = f == 0 ? act[j].lo : act[j].hi;
          const Slot& z = f == 0 ? pre[j].lo : pre[j].hi;
          if (a.is_const()) continue;
          sb.add_equality(RowKind::kActivation, {{a.column, 1.0}, {z.column, -1.0}}, 0.0, {});
        }
      }
    } else {
      std::vector<std::array<std::vector<int>, 2>> sel(nl);
      std::vector<std::array<std::vector<int>, 2>> seg(nl);  // table segment index per selector
      for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < nl; ++j) {
          const Slot& z = f == 0 ? pre[j].lo : pre[j].hi;
          if (z.is_const()) continue;
          const StepBoundTable& t = tables[l - 1][j];
          std::vector<bool> feasible(t.num_segments(), true);
          if (options.prune_segments) {
            feasible = feasible_segments(bounds.z_lo[l][j], bounds.z_hi[l][j], t.breakpoints);
          }
          for (int i = 0; i < t.num_segments(); ++i) {
            if (!feasible[i]) {
              ++pruned;
              continue;
            }
            sel[j][f].push_back(lay.add_selector(
                {f == 0 ? SelectorFamily::kLower : SelectorFamily::kUpper, l, j, i}));
            seg[j][f].push_back(i);
          }
        }
      }
      // a_lo = sum gamma_lo_i beta_lo_i, a_hi = sum gamma_hi_i beta_hi_i
      for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < nl; ++j) {
          const Slot& a = f == 0 ? act[j].lo : act[j].hi;
          if (a.is_const()) continue;
          const StepBoundTable& t = tables[l - 1][j];
          std::vector<SystemBuilder::Term> b;
          for (std::size_t s = 0; s < sel[j][f].size(); ++s) {
            const int i = seg[j][f][s];
            b.push_back({sel[j][f][s], f == 0 ? t.lower[i] : t.upper[i]});
          }
          sb.add_equality(RowKind::kActivation, {{a.column, 1.0}}, 0.0, std::move(b));
        }
      }
      for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < nl; ++j) {
          if (!sel[j][f].empty()) sb.add_onehot(sel[j][f]);
        }
      }
      for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < nl; ++j) {
          const Slot& z = f == 0 ? pre[j].lo : pre[j].hi;
          if (z.is_const()) continue;
          const StepBoundTable& t = tables[l - 1][j];
          std::vector<SystemBuilder::Term> lower, upper;
          for (std::size_t s = 0; s < sel[j][f].size(); ++s) {
            const int i = seg[j][f][s];
            lower.push_back({sel[j][f][s], -t.breakpoints[i]});
            upper.push_back({sel[j][f][s], t.breakpoints[i + 1]});
          }
          sb.add_inequality(RowKind::kSegment, {{z.column, -1.0}}, 0.0, std::move(lower));
          sb.add_inequality(RowKind::kSegment, {{z.column, 1.0}}, 0.0, std::move(upper));
        }
      }
    }
    prev = act;
  }

  std::vector<SystemBuilder::Term> obj;
  double offset = 0.0;
  const Slot& lo = prev[query.label].lo;
  const Slot& hi = prev[query.target].hi;
  if (lo.is_const()) offset += lo.value;
  else obj.push_back({lo.column, 1.0});
  if (hi.is_const()) offset -= hi.value;
  else obj.push_back({hi.column, -1.0});
  sb.set_objective(std::move(obj), offset);
  sb.set_pruned(pruned);
  return sb.finish();
}

MixedConstraintSystem build_model2(const Network& net, const PairQuery& query, int n_segments,
                                   Model2Options options) {
  IntervalBounds bounds = propagate(net, query.input);
  return build_model2(net, query, default_step_tables(net, bounds, n_segments), bounds, options);
}

MixedConstraintSystem build_pair_system(const Network& net, const PairQuery& query, const EncodeOptions& options) {
  if (options.model == 1) {
    if (!is_piecewise_linear(net.hidden_activation())) {
      throw Error("model 1 needs a piecewise-linear activation; use model 2 for " +
                  std::string(activation_name(net.hidden_activation())));
    }
    return build_model1(net, query);
  }
  if (options.model == 2) {
    Model2Options m2;
    m2.one_sided = options.one_sided;
    return build_model2(net, query, options.segments, m2);
  }
  throw Error("model must be 1 or 2");
}

}  // namespace certiq
