#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

double act(certiq::Activation a, double z) {
  switch (a) {
    case certiq::Activation::kRelu: return z > 0.0 ? z : 0.0;
    case certiq::Activation::kHardTanh: return z < -1.0 ? -1.0 : (z > 1.0 ? 1.0 : z);
    case certiq::Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case certiq::Activation::kTanh: return std::tanh(z);
    case certiq::Activation::kIdentity: return z;
  }
  return z;
}

}  // namespace

Vector forward(const certiq::Network& net, const Vector& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (int l = 0; l < net.num_layers(); ++l) {
    const certiq::Layer& layer = net.layer(l);
    std::vector<double> next(layer.out_dim());
    for (int j = 0; j < layer.out_dim(); ++j) {
      double s = layer.bias[j];
      for (int k = 0; k < layer.in_dim(); ++k) s += layer.weights(j, k) * h[k];
      next[j] = l + 1 == net.num_layers() ? s : act(layer.activation, s);
    }
    h = std::move(next);
  }
  return Eigen::Map<Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
}

double grid_min(const certiq::Box& box, double step, const std::function<double(const Vector&)>& fn) {
  const int d = box.dim();
  if (d < 1 || d > 2) throw std::invalid_argument("grid oracle supports 1 or 2 inputs");
  std::vector<int> count(d);
  for (int i = 0; i < d; ++i) count[i] = std::max(1, static_cast<int>(std::ceil((box.hi[i] - box.lo[i]) / step)));
  auto coord = [&](int i, int k) {
    return k == count[i] ? box.hi[i] : box.lo[i] + (box.hi[i] - box.lo[i]) * k / count[i];
  };
  double best = std::numeric_limits<double>::infinity();
  Vector x(d);
  for (int a = 0; a <= count[0]; ++a) {
    x[0] = coord(0, a);
    if (d == 1) {
      best = std::min(best, fn(x));
      continue;
    }
    for (int b = 0; b <= count[1]; ++b) {
      x[1] = coord(1, b);
      best = std::min(best, fn(x));
    }
  }
  return best;
}

double grid_pair_margin(const certiq::Network& net, const certiq::Box& box, int label, int target, double step) {
  return grid_min(box, step, [&](const Vector& x) {
    const Vector f = forward(net, x);
    return f[label] - f[target];
  });
}

double grid_robust_margin(const certiq::Network& net, const certiq::Box& box, int label, double step) {
  return grid_min(box, step, [&](const Vector& x) {
    const Vector f = forward(net, x);
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < f.size(); ++k) {
      if (k != label) m = std::min(m, f[label] - f[k]);
    }
    return m;
  });
}

double vertex_lp(const certiq::LpProblem& lp) {
  const int n = lp.num_vars();
  const int me = static_cast<int>(lp.A.rows());
  // Candidate tight rows: inequalities then box faces, each as g'y = h.
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (int i = 0; i < lp.C.rows(); ++i) {
    rows.push_back(lp.C.row(i).transpose());
    rhs.push_back(lp.d[i]);
  }
  for (int j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(lp.hi[j]);
    rows.push_back(e);
    rhs.push_back(lp.lo[j]);
  }
  const int need = n - me;
  const int m = static_cast<int>(rows.size());
  double best = std::numeric_limits<double>::infinity();
  if (need < 0) throw std::invalid_argument("vertex oracle needs at most n equality rows");
  std::vector<int> pick(need);
  for (int i = 0; i < need; ++i) pick[i] = i;
  auto feasible = [&](const Vector& y) {
    const double tol = 1e-8;
    if (me && (lp.A * y - lp.b).cwiseAbs().maxCoeff() > tol) return false;
    if (lp.C.rows() && (lp.C * y - lp.d).maxCoeff() > tol) return false;
    for (int j = 0; j < n; ++j) {
      if (y[j] < lp.lo[j] - tol || y[j] > lp.hi[j] + tol) return false;
    }
    return true;
  };
  while (true) {
    Matrix M(n, n);
    Vector r(n);
    if (me) {
      M.topRows(me) = lp.A;
      r.head(me) = lp.b;
    }
    for (int i = 0; i < need; ++i) {
      M.row(me + i) = rows[pick[i]].transpose();
      r[me + i] = rhs[pick[i]];
    }
    Eigen::FullPivLU<Matrix> lu(M);
    if (lu.rank() == n) {
      const Vector y = lu.solve(r);
      if (feasible(y)) best = std::min(best, lp.c.dot(y));
    }
    int k = need - 1;
    while (k >= 0 && pick[k] == m - need + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < need; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

double qubo_energy(const certiq::MixedConstraintSystem& sys, const certiq::BitEncoding& enc, double rho,
                   const certiq::Bits& bits) {
  std::size_t pos = 0;
  Vector y = enc.y_lo;
  for (std::size_t i = 0; i < enc.y_weights.size(); ++i) {
    for (double w : enc.y_weights[i]) y[i] += bits.at(pos++) ? w : 0.0;
  }
  std::vector<double> s(enc.slack_rows.size(), 0.0);
  for (std::size_t r = 0; r < enc.slack_rows.size(); ++r) {
    for (double w : enc.slack_weights[r]) s[r] += bits.at(pos++) ? w : 0.0;
  }
  Vector beta(sys.num_binary());
  for (int k = 0; k < sys.num_binary(); ++k) beta[k] = bits.at(pos++);
  if (pos != bits.size()) throw std::invalid_argument("bit count mismatch");

  double penalty = 0.0;
  for (int i = 0; i < sys.num_eq(); ++i) {
    double v = -sys.b0[i];
    for (int j = 0; j < sys.num_continuous(); ++j) v += sys.A(i, j) * y[j];
    for (int k = 0; k < sys.num_binary(); ++k) v -= sys.B(i, k) * beta[k];
    penalty += v * v;
  }
  for (std::size_t r = 0; r < enc.slack_rows.size(); ++r) {
    const int row = enc.slack_rows[r];
    double v = s[r] - sys.d0[row];
    for (int j = 0; j < sys.num_continuous(); ++j) v += sys.C(row, j) * y[j];
    for (int k = 0; k < sys.num_binary(); ++k) v -= sys.D(row, k) * beta[k];
    penalty += v * v;
  }
  double obj = sys.objective_offset;
  for (int j = 0; j < sys.num_continuous(); ++j) obj += sys.objective[j] * y[j];
  return obj + 0.5 * rho * penalty;
}

std::vector<Vector> sample_box(const certiq::Box& box, int n, certiq::Rng& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    Vector x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    out.push_back(x);
  }
  return out;
}

}  // namespace oracle

namespace fixture {

certiq::Network random_net(certiq::Rng& rng, int in, const std::vector<int>& hidden, int out,
                           certiq::Activation act, double scale) {
  std::vector<certiq::Layer> layers;
  int prev = in;
  std::vector<int> widths = hidden;
  widths.push_back(out);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    certiq::Layer layer;
    layer.weights.resize(widths[l], prev);
    layer.bias.resize(widths[l]);
    for (int j = 0; j < widths[l]; ++j) {
      for (int k = 0; k < prev; ++k) layer.weights(j, k) = scale * rng.uniform(-1.0, 1.0);
      layer.bias[j] = 0.5 * scale * rng.uniform(-1.0, 1.0);
    }
    layer.activation = l + 1 == widths.size() ? certiq::Activation::kIdentity : act;
    layers.push_back(std::move(layer));
    prev = widths[l];
  }
  return certiq::Network(in, act, std::move(layers));
}

certiq::PruneMask random_mask(certiq::Rng& rng, const certiq::Network& net, double keep) {
  certiq::PruneMask m;
  for (const certiq::Layer& layer : net.layers()) {
    certiq::Matrix mask(layer.weights.rows(), layer.weights.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < keep ? 1.0 : 0.0;
    m.masks.push_back(mask);
  }
  return m;
}

Vector random_point(certiq::Rng& rng, int dim, double lo, double hi) {
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

certiq::MixedConstraintSystem integer_system(certiq::Rng& rng, int num_vars, int num_rows, int group_size,
                                             bool with_equality) {
  using Term = certiq::SystemBuilder::Term;
  certiq::SystemBuilder sb;
  for (int i = 0; i < num_vars; ++i) sb.layout().add_column({}, 0.0, 3.0);
  std::vector<int> group;
  for (int k = 0; k < group_size; ++k) group.push_back(sb.layout().add_selector({}));
  auto coef = [&] { return static_cast<double>(static_cast<int>(rng.below(3)) - 1); };
  // Row over y_i - y_j or +-y_i.
  auto y_terms = [&] {
    std::vector<Term> t;
    const int i = static_cast<int>(rng.below(num_vars));
    if (num_vars > 1 && rng.coin()) {
      int j = static_cast<int>(rng.below(num_vars - 1));
      if (j >= i) ++j;
      t = {{i, 1.0}, {j, -1.0}};
    } else {
      t = {{i, rng.coin() ? 1.0 : -1.0}};
    }
    return t;
  };
  for (int r = 0; r < num_rows; ++r) {
    const std::vector<Term> t = y_terms();
    double cy_min = 0.0;
    for (const Term& term : t) cy_min += std::min(0.0, 3.0 * term.coef);
    std::vector<Term> b;
    double db_max = -std::numeric_limits<double>::infinity();
    for (int k : group) {
      const double v = coef();
      b.push_back({k, v});
      db_max = std::max(db_max, v);
    }
    // slack upper bound d0 + max D beta - min C y is exactly 3
    sb.add_inequality(certiq::RowKind::kOther, t, 3.0 - db_max + cy_min, b);
  }
  if (with_equality && num_vars > 1) {
    std::vector<Term> b;
    for (int k : group) b.push_back({k, coef()});
    sb.add_equality(certiq::RowKind::kOther, {{0, 1.0}, {1, -1.0}}, coef(), b);
  }
  sb.add_onehot(group);
  std::vector<Term> obj;
  for (int i = 0; i < num_vars; ++i) obj.push_back({i, static_cast<double>(static_cast<int>(rng.below(5)) - 2)});
  if (obj[0].coef == 0.0) obj[0].coef = 1.0;
  sb.set_objective(obj, 0.0);
  return sb.finish();
}

}  // namespace fixture
