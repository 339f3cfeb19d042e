#include "certiq/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "certiq/error.hpp"

namespace certiq {

using nlohmann::json;

std::string ColumnInfo::name() const {
  auto base = [&](const char* tag) {
    return std::string(tag) + "[" + std::to_string(layer) + "," + std::to_string(neuron) + "]";
  };
  switch (role) {
    case ColumnRole::kInput: return "x[" + std::to_string(neuron) + "]";
    case ColumnRole::kActivation: return base("a");
    case ColumnRole::kPreActivation: return base("z");
    case ColumnRole::kProduct:
      return "u[" + std::to_string(layer) + "," + std::to_string(neuron) + "," +
             std::to_string(segment) + "]";
    case ColumnRole::kActLower: return base("a_lo");
    case ColumnRole::kActUpper: return base("a_hi");
    case ColumnRole::kPreLower: return base("z_lo");
    case ColumnRole::kPreUpper: return base("z_hi");
    case ColumnRole::kAuxiliary: return "aux[" + std::to_string(neuron) + "]";
  }
  return "?";
}

int VariableLayout::add_column(ColumnInfo info, double lo_bound, double hi_bound) {
  if (!std::isfinite(lo_bound) || !std::isfinite(hi_bound) || lo_bound > hi_bound) {
    throw Error("column " + info.name() + " needs a finite box with lo <= hi");
  }
  columns.push_back(info);
  lo.conservativeResize(columns.size());
  hi.conservativeResize(columns.size());
  lo[lo.size() - 1] = lo_bound;
  hi[hi.size() - 1] = hi_bound;
  if (info.role == ColumnRole::kInput) input_columns.push_back(static_cast<int>(columns.size()) - 1);
  return static_cast<int>(columns.size()) - 1;
}

int VariableLayout::add_selector(SelectorInfo info) {
  selectors.push_back(info);
  return static_cast<int>(selectors.size()) - 1;
}

void MixedConstraintSystem::validate() const {
  const int n = num_continuous();
  const int p = num_binary();
  auto fail = [](const std::string& what) { throw InvariantError("constraint system: " + what); };
  if (objective.size() != n) fail("objective length");
  if (A.cols() != n || C.cols() != n) fail("continuous column count");
  if (B.cols() != p || D.cols() != p) fail("binary column count");
  if (A.rows() != B.rows() || A.rows() != b0.size()) fail("equality block rows");
  if (C.rows() != D.rows() || C.rows() != d0.size()) fail("inequality block rows");
  if (static_cast<int>(eq_kinds.size()) != A.rows() || static_cast<int>(ineq_kinds.size()) != C.rows())
    fail("row kind tags");
  std::vector<int> seen(p, 0);
  for (const auto& g : onehot_groups) {
    for (int k : g) {
      if (k < 0 || k >= p) fail("one-hot index out of range");
      if (seen[k]++) fail("selector in two one-hot groups");
    }
  }
}

Vector MixedConstraintSystem::input_point(const Vector& y) const {
  Vector x(layout.input_columns.size());
  for (std::size_t i = 0; i < layout.input_columns.size(); ++i) x[i] = y[layout.input_columns[i]];
  return x;
}

void SystemBuilder::add_equality(RowKind kind, std::vector<Term> y_terms, double rhs,
                                 std::vector<Term> beta_terms) {
  eq_.push_back({kind, std::move(y_terms), rhs, std::move(beta_terms)});
}

void SystemBuilder::add_inequality(RowKind kind, std::vector<Term> y_terms, double rhs,
                                   std::vector<Term> beta_terms) {
  ineq_.push_back({kind, std::move(y_terms), rhs, std::move(beta_terms)});
}

void SystemBuilder::add_onehot(std::vector<int> group) {
  std::vector<Term> beta;
  for (int k : group) beta.push_back({k, -1.0});
  // 0 = 1 - sum(beta): one-hot rows live in the equality block, acting on beta via B
  eq_.push_back({RowKind::kOneHot, {}, 1.0, std::move(beta)});
  groups_.push_back(std::move(group));
}

void SystemBuilder::set_objective(std::vector<Term> terms, double offset) {
  objective_ = std::move(terms);
  offset_ = offset;
}

MixedConstraintSystem SystemBuilder::finish() const {
  MixedConstraintSystem sys;
  sys.layout = layout_;
  const int n = layout_.num_continuous();
  const int p = layout_.num_binary();
  auto fill = [&](const std::vector<Row>& rows, Matrix& M, Vector& r, Matrix& K,
                  std::vector<RowKind>& kinds) {
    M = Matrix::Zero(rows.size(), n);
    K = Matrix::Zero(rows.size(), p);
    r = Vector::Zero(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const Term& t : rows[i].y) M(i, t.index) += t.coef;
      for (const Term& t : rows[i].beta) K(i, t.index) += t.coef;
      r[i] = rows[i].rhs;
      kinds.push_back(rows[i].kind);
    }
  };
  fill(eq_, sys.A, sys.b0, sys.B, sys.eq_kinds);
  fill(ineq_, sys.C, sys.d0, sys.D, sys.ineq_kinds);
  sys.objective = Vector::Zero(n);
  for (const Term& t : objective_) sys.objective[t.index] += t.coef;
  sys.objective_offset = offset_;
  sys.onehot_groups = groups_;
  sys.pruned_selectors = pruned_;
  sys.validate();
  return sys;
}

FeasibilityReport eval_feasible(const MixedConstraintSystem& sys, const Vector& y, const Vector& beta) {
  if (y.size() != sys.num_continuous() || beta.size() != sys.num_binary()) {
    throw Error("eval_feasible: vector lengths do not match the layout");
  }
  FeasibilityReport r;
  r.objective = sys.objective.dot(y) + sys.objective_offset;
  double v = -std::numeric_limits<double>::infinity();
  if (sys.num_eq() > 0) v = std::max(v, (sys.A * y - sys.b0 - sys.B * beta).cwiseAbs().maxCoeff());
  if (sys.num_ineq() > 0) v = std::max(v, (sys.C * y - sys.d0 - sys.D * beta).maxCoeff());
  if (y.size() > 0) {
    v = std::max(v, (sys.layout.lo - y).maxCoeff());
    v = std::max(v, (y - sys.layout.hi).maxCoeff());
  }
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    v = std::max(v, std::min(std::abs(beta[k]), std::abs(beta[k] - 1.0)));
  }
  r.max_violation = v;
  return r;
}

namespace {

struct Domain {
  // Each factor is either a one-hot group (pick exactly one) or a free bit.
  std::vector<std::vector<int>> factors;
  std::vector<bool> is_group;
};

Domain make_domain(int num_binary, const std::vector<std::vector<int>>& groups) {
  Domain d;
  std::vector<bool> grouped(num_binary, false);
  for (const auto& g : groups) {
    d.factors.push_back(g);
    d.is_group.push_back(true);
    for (int k : g) grouped[k] = true;
  }
  for (int k = 0; k < num_binary; ++k) {
    if (!grouped[k]) {
      d.factors.push_back({k});
      d.is_group.push_back(false);
    }
  }
  return d;
}

}  // namespace

void for_each_onehot_beta(int num_binary, const std::vector<std::vector<int>>& groups,
                          const std::function<bool(const Vector&)>& fn) {
  Domain d = make_domain(num_binary, groups);
  const std::size_t f = d.factors.size();
  std::vector<int> choice(f, 0);
  std::vector<int> radix(f);
  for (std::size_t i = 0; i < f; ++i) {
    radix[i] = d.is_group[i] ? static_cast<int>(d.factors[i].size()) : 2;
    if (radix[i] == 0) return;  // empty group: no valid assignment
  }
  Vector beta = Vector::Zero(num_binary);
  while (true) {
    beta.setZero();
    for (std::size_t i = 0; i < f; ++i) {
      if (d.is_group[i]) {
        beta[d.factors[i][choice[i]]] = 1.0;
      } else if (choice[i] == 1) {
        beta[d.factors[i][0]] = 1.0;
      }
    }
    if (!fn(beta)) return;
    // odometer with the last factor varying fastest
    std::size_t pos = f;
    while (pos > 0) {
      --pos;
      if (++choice[pos] < radix[pos]) break;
      choice[pos] = 0;
      if (pos == 0) return;
    }
    if (f == 0) return;
  }
}

void for_each_onehot_beta(const MixedConstraintSystem& sys,
                          const std::function<bool(const Vector&)>& fn) {
  for_each_onehot_beta(sys.num_binary(), sys.onehot_groups, fn);
}

std::size_t count_onehot_assignments(int num_binary, const std::vector<std::vector<int>>& groups) {
  Domain d = make_domain(num_binary, groups);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d.factors.size(); ++i) {
    std::size_t r = d.is_group[i] ? d.factors[i].size() : 2;
    if (r != 0 && total > std::numeric_limits<std::size_t>::max() / r) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= r;
  }
  return total;
}

std::size_t count_onehot_assignments(const MixedConstraintSystem& sys) {
  return count_onehot_assignments(sys.num_binary(), sys.onehot_groups);
}

bool is_onehot_valid(const Vector& beta, const std::vector<std::vector<int>>& groups) {
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (beta[k] != 0.0 && beta[k] != 1.0) return false;
  }
  for (const auto& g : groups) {
    int on = 0;
    for (int k : g) on += beta[k] == 1.0;
    if (on != 1) return false;
  }
  return true;
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

const char* row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::kInput: return "input";
    case RowKind::kPreActivation: return "pre";
    case RowKind::kActivation: return "act";
    case RowKind::kOneHot: return "onehot";
    case RowKind::kSegment: return "segment";
    case RowKind::kBigM: return "bigm";
    case RowKind::kCut: return "cut";
    case RowKind::kOther: return "other";
  }
  return "other";
}

}  // namespace

std::string system_to_json(const MixedConstraintSystem& sys) {
  json doc;
  json cols = json::array();
  for (const ColumnInfo& c : sys.layout.columns) cols.push_back(c.name());
  json sels = json::array();
  for (const SelectorInfo& s : sys.layout.selectors) {
    sels.push_back({{"layer", s.layer}, {"neuron", s.neuron}, {"segment", s.segment},
                    {"family", s.family == SelectorFamily::kLower   ? "lower"
                               : s.family == SelectorFamily::kUpper ? "upper"
                               : s.family == SelectorFamily::kFree  ? "free"
                                                                    : "single"}});
  }
  auto kinds = [](const std::vector<RowKind>& ks) {
    json out = json::array();
    for (RowKind k : ks) out.push_back(row_kind_name(k));
    return out;
  };
  doc["columns"] = cols;
  doc["selectors"] = sels;
  doc["lo"] = vec(sys.layout.lo);
  doc["hi"] = vec(sys.layout.hi);
  doc["objective"] = vec(sys.objective);
  doc["objective_offset"] = sys.objective_offset;
  doc["A"] = matrix_json(sys.A);
  doc["b0"] = vec(sys.b0);
  doc["B"] = matrix_json(sys.B);
  doc["eq_kinds"] = kinds(sys.eq_kinds);
  doc["C"] = matrix_json(sys.C);
  doc["d0"] = vec(sys.d0);
  doc["D"] = matrix_json(sys.D);
  doc["ineq_kinds"] = kinds(sys.ineq_kinds);
  doc["onehot_groups"] = sys.onehot_groups;
  doc["pruned_selectors"] = sys.pruned_selectors;
  return doc.dump(2);
}

}  // namespace certiq
