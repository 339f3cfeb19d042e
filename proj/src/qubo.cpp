#include "certiq/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "certiq/error.hpp"

namespace certiq {

int BitEncoding::y_bits() const {
  int n = 0;
  for (const auto& w : y_weights) n += static_cast<int>(w.size());
  return n;
}

int BitEncoding::slack_bits() const {
  int n = 0;
  for (const auto& w : slack_weights) n += static_cast<int>(w.size());
  return n;
}

double BitEncoding::resolution() const {
  double r = 0.0;
  auto scan = [&](const std::vector<std::vector<double>>& ws) {
    for (const auto& w : ws) {
      if (!w.empty() && (r == 0.0 || w.front() < r)) r = w.front();
    }
  };
  scan(y_weights);
  scan(slack_weights);
  return r;
}

namespace {

std::vector<double> binary_weights(double range, int bits) {
  if (range <= 0.0) return {};
  const double delta = range / (std::ldexp(1.0, bits) - 1.0);
  std::vector<double> w(bits);
  for (int k = 0; k < bits; ++k) w[k] = std::ldexp(delta, k);
  return w;
}

// Range of D_r . beta over one-hot-valid beta.
std::pair<double, double> selector_range(const MixedConstraintSystem& sys, int row) {
  std::vector<bool> grouped(sys.num_binary(), false);
  double lo = 0.0, hi = 0.0;
  for (const auto& g : sys.onehot_groups) {
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -gmin;
    for (int k : g) {
      grouped[k] = true;
      gmin = std::min(gmin, sys.D(row, k));
      gmax = std::max(gmax, sys.D(row, k));
    }
    if (!g.empty()) {
      lo += gmin;
      hi += gmax;
    }
  }
  for (int k = 0; k < sys.num_binary(); ++k) {
    if (grouped[k]) continue;
    lo += std::min(0.0, sys.D(row, k));
    hi += std::max(0.0, sys.D(row, k));
  }
  return {lo, hi};
}

struct BitMap {
  std::vector<int> owner;  // variable or encoded-row index of each bit
  std::vector<double> weight;
};

BitMap flatten(const std::vector<std::vector<double>>& weights) {
  BitMap m;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (double w : weights[i]) {
      m.owner.push_back(static_cast<int>(i));
      m.weight.push_back(w);
    }
  }
  return m;
}

void check_encoding(const MixedConstraintSystem& sys, const BitEncoding& enc) {
  if (static_cast<int>(enc.y_weights.size()) != sys.num_continuous() || enc.y_lo.size() != sys.num_continuous() ||
      enc.slack_weights.size() != enc.slack_rows.size() ||
      enc.slack_hi.size() != static_cast<Eigen::Index>(enc.slack_rows.size())) {
    throw Error("bit encoding does not match the constraint system");
  }
  for (int r : enc.slack_rows) {
    if (r < 0 || r >= sys.num_ineq()) throw Error("bit encoding refers to a missing inequality row");
  }
}

Matrix encoded_rows(const Matrix& M, const std::vector<int>& rows) {
  Matrix out(rows.size(), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = M.row(rows[i]);
  return out;
}

Vector encoded_rows(const Vector& v, const std::vector<int>& rows) {
  Vector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

}  // namespace

BitEncoding make_encoding(const MixedConstraintSystem& sys, int bits_per_var, int bits_per_slack,
                          EncodingOptions options) {
  if (bits_per_var < 1 || bits_per_var > 30 || bits_per_slack < 1 || bits_per_slack > 30) {
    throw Error("bits per variable and per slack must lie in [1, 30]");
  }
  BitEncoding enc;
  enc.y_lo = sys.layout.lo;
  for (int i = 0; i < sys.num_continuous(); ++i) {
    enc.y_weights.push_back(binary_weights(sys.layout.hi[i] - sys.layout.lo[i], bits_per_var));
  }
  std::vector<double> hi;
  for (int r = 0; r < sys.num_ineq(); ++r) {
    double cy_min = 0.0, cy_max = 0.0;
    for (int j = 0; j < sys.num_continuous(); ++j) {
      const double a = sys.C(r, j) * sys.layout.lo[j];
      const double b = sys.C(r, j) * sys.layout.hi[j];
      cy_min += std::min(a, b);
      cy_max += std::max(a, b);
    }
    auto [db_min, db_max] = selector_range(sys, r);
    const double upper = sys.d0[r] + db_max - cy_min;
    const double lower = sys.d0[r] + db_min - cy_max;
    const double scale = 1e-9 * std::max({1.0, std::abs(sys.d0[r]), std::abs(cy_min)});
    if (upper < -scale) {
      throw Error("inequality row " + std::to_string(r) + " is violated everywhere on the box");
    }
    if (options.drop_vacuous_rows && lower >= 0.0) {
      enc.dropped_rows.push_back(r);
      continue;
    }
    enc.slack_rows.push_back(r);
    hi.push_back(std::max(0.0, upper));
    enc.slack_weights.push_back(binary_weights(hi.back(), bits_per_slack));
  }
  enc.slack_hi = Eigen::Map<Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  return enc;
}

int qubo_dimension(const MixedConstraintSystem& sys, const BitEncoding& enc) {
  return enc.y_bits() + enc.slack_bits() + sys.num_binary();
}

int spin_count(const MixedConstraintSystem& sys, const QuboSettings& settings) {
  return qubo_dimension(sys, make_encoding(sys, settings.bits_per_var, settings.bits_per_slack,
                                           {.drop_vacuous_rows = settings.drop_vacuous_rows}));
}

Matrix penalty_matrix(const MixedConstraintSystem& sys, const BitEncoding& enc) {
  check_encoding(sys, enc);
  const int n = sys.num_continuous();
  const int ny = enc.y_bits();
  const int ns = enc.slack_bits();
  const int p = sys.num_binary();
  const int s = static_cast<int>(enc.slack_rows.size());
  Matrix Ty = Matrix::Zero(n, ny);
  BitMap yb = flatten(enc.y_weights);
  for (int b = 0; b < ny; ++b) Ty(yb.owner[b], b) = yb.weight[b];
  Matrix Ts = Matrix::Zero(s, ns);
  BitMap sb = flatten(enc.slack_weights);
  for (int b = 0; b < ns; ++b) Ts(sb.owner[b], b) = sb.weight[b];
  const Matrix Ce = encoded_rows(sys.C, enc.slack_rows);
  const Matrix De = encoded_rows(sys.D, enc.slack_rows);
  const int me = sys.num_eq();
  Matrix M = Matrix::Zero(me + s, ny + ns + p);
  M.block(0, 0, me, ny) = sys.A * Ty;
  M.block(0, ny + ns, me, p) = -sys.B;
  M.block(me, 0, s, ny) = Ce * Ty;
  M.block(me, ny, s, ns) = Ts;
  M.block(me, ny + ns, s, p) = -De;
  return M;
}

Vector penalty_rhs(const MixedConstraintSystem& sys, const BitEncoding& enc) {
  check_encoding(sys, enc);
  const Matrix Ce = encoded_rows(sys.C, enc.slack_rows);
  const Vector de = encoded_rows(sys.d0, enc.slack_rows);
  Vector r(sys.num_eq() + Ce.rows());
  r << sys.b0 - sys.A * enc.y_lo, de - Ce * enc.y_lo;
  return r;
}

QuboInstance assemble(const MixedConstraintSystem& sys, const BitEncoding& enc, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error("penalty weight rho must be positive");
  check_encoding(sys, enc);
  const int ny = enc.y_bits();
  const int ns = enc.slack_bits();
  const int p = sys.num_binary();
  const int me = sys.num_eq();
  const BitMap yb = flatten(enc.y_weights);
  const BitMap sb = flatten(enc.slack_weights);

  // Stacked continuous and selector coefficients E = [A; C_e], G = [B; D_e].
  const Matrix Ce = encoded_rows(sys.C, enc.slack_rows);
  const Matrix De = encoded_rows(sys.D, enc.slack_rows);
  Matrix E(me + Ce.rows(), sys.num_continuous());
  E << sys.A, Ce;
  Matrix G(me + De.rows(), p);
  G << sys.B, De;
  const Vector r = penalty_rhs(sys, enc);

  const double h = 0.5 * rho;
  const Matrix EtE = E.transpose() * E;
  const Matrix EtG = E.transpose() * G;
  const Vector Etr = E.transpose() * r;

  QuboInstance inst;
  QuboModel& m = inst.model;
  const int dim = ny + ns + p;
  m.Q = Matrix::Zero(dim, dim);
  m.q = Vector::Zero(dim);
  const int so = ny;
  const int bo = ny + ns;

  for (int a = 0; a < ny; ++a) {
    const int va = yb.owner[a];
    const double wa = yb.weight[a];
    for (int b = 0; b < ny; ++b) m.Q(a, b) = h * wa * yb.weight[b] * EtE(va, yb.owner[b]);
    for (int t = 0; t < ns; ++t) {
      const double v = h * wa * sb.weight[t] * Ce(sb.owner[t], va);
      m.Q(a, so + t) = v;
      m.Q(so + t, a) = v;
    }
    for (int k = 0; k < p; ++k) {
      const double v = -h * wa * EtG(va, k);
      m.Q(a, bo + k) = v;
      m.Q(bo + k, a) = v;
    }
    m.q[a] = wa * (sys.objective[va] - rho * Etr[va]);
  }
  for (int t = 0; t < ns; ++t) {
    const int row = sb.owner[t];
    for (int u = 0; u < ns; ++u) {
      if (sb.owner[u] == row) m.Q(so + t, so + u) = h * sb.weight[t] * sb.weight[u];
    }
    for (int k = 0; k < p; ++k) {
      const double v = -h * sb.weight[t] * De(row, k);
      m.Q(so + t, bo + k) = v;
      m.Q(bo + k, so + t) = v;
    }
    m.q[so + t] = -rho * sb.weight[t] * r[me + row];
  }
  m.Q.block(bo, bo, p, p) = h * G.transpose() * G;
  m.q.segment(bo, p) = rho * G.transpose() * r;
  // Gram products are not bitwise symmetric
  m.Q = (0.5 * (m.Q + m.Q.transpose())).eval();
  m.constant = sys.objective.dot(enc.y_lo) + sys.objective_offset + h * r.squaredNorm();

  inst.rho = rho;
  inst.encoding = enc;
  inst.layout = sys.layout;
  inst.objective = sys.objective;
  inst.objective_offset = sys.objective_offset;
  inst.M_eq = penalty_matrix(sys, enc);
  inst.r_eq = r;
  inst.onehot_groups = sys.onehot_groups;
  return inst;
}

double choose_rho(const MixedConstraintSystem& sys, const BitEncoding& enc) {
  const double c1 = sys.objective.lpNorm<1>();
  const double delta = enc.resolution();
  if (c1 == 0.0 || delta == 0.0) return 1.0;
  const double range = sys.num_continuous() ? (sys.layout.hi - sys.layout.lo).maxCoeff() : 0.0;
  return 2.0 * c1 * range / (delta * delta) + 1.0;
}

Decoded decode(const QuboInstance& inst, const Bits& bits) {
  if (static_cast<int>(bits.size()) != inst.dim()) throw Error("bit vector length does not match the QUBO");
  const BitEncoding& enc = inst.encoding;
  Decoded d;
  d.y = enc.y_lo;
  int pos = 0;
  for (std::size_t i = 0; i < enc.y_weights.size(); ++i) {
    for (double w : enc.y_weights[i]) d.y[i] += w * bits[pos++];
  }
  d.slack = Vector::Zero(enc.slack_weights.size());
  for (std::size_t r = 0; r < enc.slack_weights.size(); ++r) {
    for (double w : enc.slack_weights[r]) d.slack[r] += w * bits[pos++];
  }
  d.beta = Vector::Zero(inst.dim() - pos);
  for (Eigen::Index k = 0; k < d.beta.size(); ++k) d.beta[k] = bits[pos++];
  Vector x(inst.dim());
  for (int i = 0; i < inst.dim(); ++i) x[i] = bits[i];
  d.residual = inst.r_eq.size() ? (inst.M_eq * x - inst.r_eq).cwiseAbs().maxCoeff() : 0.0;
  d.objective = inst.objective.dot(d.y) + inst.objective_offset;
  return d;
}

Bits encode_point(const QuboInstance& inst, const Vector& y, const Vector& beta, const Vector& slack) {
  const BitEncoding& enc = inst.encoding;
  Bits bits;
  auto put = [&](const std::vector<double>& w, double value) {
    if (w.empty()) return;
    const double top = std::ldexp(1.0, static_cast<int>(w.size())) - 1.0;
    const double level = std::clamp(std::round(value / w.front()), 0.0, top);
    auto n = static_cast<unsigned long long>(level);
    for (std::size_t k = 0; k < w.size(); ++k) bits.push_back(static_cast<std::uint8_t>((n >> k) & 1ULL));
  };
  for (std::size_t i = 0; i < enc.y_weights.size(); ++i) put(enc.y_weights[i], y[i] - enc.y_lo[i]);
  for (std::size_t r = 0; r < enc.slack_weights.size(); ++r) put(enc.slack_weights[r], slack[r]);
  for (Eigen::Index k = 0; k < beta.size(); ++k) bits.push_back(beta[k] > 0.5 ? 1 : 0);
  return bits;
}

double energy(const QuboModel& model, const Bits& bits) {
  if (static_cast<int>(bits.size()) != model.dim()) throw Error("bit vector length does not match the QUBO");
  double e = model.constant;
  for (int i = 0; i < model.dim(); ++i) {
    if (!bits[i]) continue;
    e += model.q[i];
    for (int j = 0; j < model.dim(); ++j) {
      if (bits[j]) e += model.Q(i, j);
    }
  }
  return e;
}

void write_qubo(const QuboModel& model, double rho, std::ostream& out) {
  char buf[128];
  const int n = model.dim();
  out << "# dimension " << n << "\n";
  std::snprintf(buf, sizeof buf, "# offset %.17g\n", model.constant);
  out << buf;
  std::snprintf(buf, sizeof buf, "# rho %.17g\n", rho);
  out << buf;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = i == j ? model.Q(i, i) + model.q[i] : model.Q(i, j) + model.Q(j, i);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, j, v);
      out << buf;
    }
  }
}

void write_qubo(const QuboInstance& inst, std::ostream& out) { write_qubo(inst.model, inst.rho, out); }

QuboModel read_qubo(std::istream& in) {
  struct Entry {
    int i, j;
    double v;
  };
  std::vector<Entry> entries;
  int dim = -1;
  double offset = 0.0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string key = first.size() > 1 ? first.substr(1) : "";
      if (key.empty()) ls >> key;
      if (key == "dimension" && !(ls >> dim)) throw Error("line " + std::to_string(lineno) + ": bad dimension");
      if (key == "offset" && !(ls >> offset)) throw Error("line " + std::to_string(lineno) + ": bad offset");
      continue;
    }
    Entry e{};
    std::istringstream es(line);
    if (!(es >> e.i >> e.j >> e.v) || e.i < 0 || e.j < 0) {
      throw Error("line " + std::to_string(lineno) + ": expected 'i j value'");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    entries.push_back(e);
  }
  int inferred = 0;
  for (const Entry& e : entries) inferred = std::max(inferred, e.j + 1);
  if (dim < 0) dim = inferred;
  if (inferred > dim) throw Error("QUBO entry index exceeds the declared dimension");
  QuboModel m;
  m.Q = Matrix::Zero(dim, dim);
  m.q = Vector::Zero(dim);
  m.constant = offset;
  for (const Entry& e : entries) {
    if (e.i == e.j) {
      m.Q(e.i, e.i) += e.v;
    } else {
      m.Q(e.i, e.j) += 0.5 * e.v;
      m.Q(e.j, e.i) += 0.5 * e.v;
    }
  }
  return m;
}

}  // namespace certiq
