#include "certiq/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "certiq/error.hpp"

namespace certiq {

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

Vector folded_rhs(const LpProblem& lp) {
  const Eigen::Index n = lp.c.size();
  Vector r(lp.C.rows() + 2 * n);
  r << lp.d, lp.hi, -lp.lo;
  return r;
}

namespace {

// Revised simplex on  M x = r, x >= 0, r >= 0, with an explicit basis inverse.
class Simplex {
 public:
  Simplex(Matrix M, Vector r, std::vector<int> basis, const LpOptions& opt)
      : M_(std::move(M)), r_(std::move(r)), basis_(std::move(basis)), opt_(opt) {
    is_basic_.assign(M_.cols(), false);
    for (int j : basis_) is_basic_[j] = true;
    refactor();
  }

  enum class Result { kOptimal, kUnbounded };

  Result run(const Vector& cost, const std::vector<bool>& may_enter) {
    int degenerate = 0;
    bool bland = false;
    const long cap = 50L * (M_.rows() + M_.cols()) + 1000;
    for (long it = 0;; ++it) {
      if (it > cap) throw Error("simplex iteration limit reached (" + std::to_string(cap) + " pivots)");
      Vector w = duals(cost);
      Vector red = cost - M_.transpose() * w;
      int enter = -1;
      double best = -opt_.optimality_tol;
      for (Eigen::Index j = 0; j < M_.cols(); ++j) {
        if (is_basic_[j] || !may_enter[j]) continue;
        if (red[j] < best) {
          enter = static_cast<int>(j);
          if (bland) break;
          best = red[j];
        }
      }
      if (enter < 0) return Result::kOptimal;

      Vector alpha = Binv_ * M_.col(enter);
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha[i] > opt_.pivot_tol) ratio = std::min(ratio, std::max(0.0, xB_[i]) / alpha[i]);
      }
      if (!std::isfinite(ratio)) return Result::kUnbounded;
      // among ties: Bland picks the smallest column index, otherwise the largest pivot
      int leave = -1;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha[i] <= opt_.pivot_tol) continue;
        if (std::max(0.0, xB_[i]) / alpha[i] > ratio + 1e-12) continue;
        if (leave < 0 || (bland ? basis_[i] < basis_[leave] : alpha[i] > alpha[leave])) {
          leave = static_cast<int>(i);
        }
      }
      pivot(leave, enter, alpha);
      if (ratio <= 1e-12) {
        if (++degenerate > opt_.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  // Pivots basic variables from the given set out of the basis where a
  // nonzero entry allows it. Rows where none exists are redundant.
  void drive_out(const std::vector<bool>& unwanted, const std::vector<bool>& may_enter) {
    for (std::size_t p = 0; p < basis_.size(); ++p) {
      if (!unwanted[basis_[p]]) continue;
      Vector row = M_.transpose() * Binv_.row(p).transpose();
      int enter = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < M_.cols(); ++j) {
        if (is_basic_[j] || !may_enter[j]) continue;
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          enter = static_cast<int>(j);
        }
      }
      if (enter < 0) continue;
      Vector alpha = Binv_ * M_.col(enter);
      pivot(static_cast<int>(p), enter, alpha);
    }
  }

  void refactor() {
    const Eigen::Index m = M_.rows();
    Matrix Bm(m, m);
    for (Eigen::Index i = 0; i < m; ++i) Bm.col(i) = M_.col(basis_[i]);
    Eigen::PartialPivLU<Matrix> lu(Bm);
    const double rcond = m > 0 ? lu.rcond() : 1.0;
    if (!(rcond > 1e-14)) {
      throw Error("simplex basis numerically singular (rcond " + std::to_string(rcond) + ")");
    }
    Binv_ = lu.inverse();
    xB_ = Binv_ * r_;
    since_refactor_ = 0;
  }

  Vector duals(const Vector& cost) const {
    Vector cB(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i) cB[i] = cost[basis_[i]];
    return Binv_.transpose() * cB;
  }

  Vector primal() const {
    Vector x = Vector::Zero(M_.cols());
    for (std::size_t i = 0; i < basis_.size(); ++i) x[basis_[i]] = xB_[i];
    return x;
  }

  int pivots() const { return pivots_; }

 private:
  void pivot(int p, int enter, const Vector& alpha) {
    const double ap = alpha[p];
    Binv_.row(p) /= ap;
    xB_[p] /= ap;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (i == p || alpha[i] == 0.0) continue;
      Binv_.row(i) -= alpha[i] * Binv_.row(p);
      xB_[i] -= alpha[i] * xB_[p];
    }
    is_basic_[basis_[p]] = false;
    is_basic_[enter] = true;
    basis_[p] = enter;
    ++pivots_;
    if (++since_refactor_ >= opt_.refactor_every) refactor();
  }

  Matrix M_;
  Vector r_;
  std::vector<int> basis_;
  std::vector<bool> is_basic_;
  LpOptions opt_;
  Matrix Binv_;
  Vector xB_;
  int since_refactor_ = 0;
  int pivots_ = 0;
};

void check_shapes(const LpProblem& lp) {
  const Eigen::Index n = lp.c.size();
  if (lp.A.cols() != n || lp.C.cols() != n || lp.lo.size() != n || lp.hi.size() != n ||
      lp.A.rows() != lp.b.size() || lp.C.rows() != lp.d.size()) {
    throw Error("LP dimensions are inconsistent");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lo[j]) || !std::isfinite(lp.hi[j])) throw Error("LP needs finite variable boxes");
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp, const LpOptions& opt) {
  check_shapes(lp);
  const int n = lp.num_vars();
  const int me = static_cast<int>(lp.A.rows());
  const int mc = static_cast<int>(lp.C.rows());
  LpSolution sol;

  for (int j = 0; j < n; ++j) {
    if (lp.lo[j] > lp.hi[j]) {
      // empty box: lo_j - hi_j > 0 with unit multipliers on both box rows
      sol.status = LpStatus::kInfeasible;
      sol.ray_pi = Vector::Zero(me);
      sol.ray_lambda = Vector::Zero(mc + 2 * n);
      const double gap = lp.lo[j] - lp.hi[j];
      sol.ray_lambda[mc + j] = 1.0 / gap;
      sol.ray_lambda[mc + n + j] = 1.0 / gap;
      return sol;
    }
  }

  // Shift y = lo + y'. Rows: [A; C | I_s; I | I_t], columns [y', s, t, artificials].
  const int m = me + mc + n;
  const int base_cols = n + mc + n;
  Vector rhs(m);
  rhs << lp.b - lp.A * lp.lo, lp.d - lp.C * lp.lo, lp.hi - lp.lo;
  std::vector<double> sign(m, 1.0);
  std::vector<int> basis(m, -1);
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) sign[i] = -1.0;
    const bool has_slack = i >= me;
    if (has_slack && sign[i] > 0.0) basis[i] = n + (i - me);
    else art_rows.push_back(i);
  }
  const int cols = base_cols + static_cast<int>(art_rows.size());
  Matrix M = Matrix::Zero(m, cols);
  M.block(0, 0, me, n) = lp.A;
  M.block(me, 0, mc, n) = lp.C;
  M.block(me + mc, 0, n, n).setIdentity();
  for (int i = me; i < m; ++i) M(i, n + (i - me)) = 1.0;
  for (int i = 0; i < m; ++i) {
    if (sign[i] < 0.0) {
      M.row(i) *= -1.0;
      rhs[i] = -rhs[i];
    }
  }
  std::vector<bool> is_art(cols, false);
  for (std::size_t k = 0; k < art_rows.size(); ++k) {
    const int c = base_cols + static_cast<int>(k);
    M(art_rows[k], c) = 1.0;
    basis[art_rows[k]] = c;
    is_art[c] = true;
  }

  Simplex spx(M, rhs, basis, opt);
  std::vector<bool> any(cols, true);
  std::vector<bool> structural(cols, true);
  for (int c = base_cols; c < cols; ++c) structural[c] = false;

  auto to_original = [&](const Vector& w) {
    Vector v(m);
    for (int i = 0; i < m; ++i) v[i] = sign[i] * w[i];
    return v;
  };

  if (!art_rows.empty()) {
    Vector cost1 = Vector::Zero(cols);
    for (int c = base_cols; c < cols; ++c) cost1[c] = 1.0;
    spx.run(cost1, any);
    spx.refactor();
    const double infeas = cost1.dot(spx.primal());
    const double scale = std::max(1.0, rhs.size() > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0);
    if (infeas > opt.feasibility_tol * scale) {
      Vector v = to_original(spx.duals(cost1));
      const Vector vA = v.head(me);
      const Vector vC = v.segment(me, mc);
      const Vector vt = v.tail(n);
      sol.status = LpStatus::kInfeasible;
      sol.iterations = spx.pivots();
      sol.ray_pi = vA;
      sol.ray_lambda.resize(mc + 2 * n);
      Vector lam_lo = -(lp.A.transpose() * vA + lp.C.transpose() * vC + vt);
      sol.ray_lambda << (-vC).cwiseMax(0.0), (-vt).cwiseMax(0.0), lam_lo.cwiseMax(0.0);
      const double value = lp.b.dot(sol.ray_pi) - folded_rhs(lp).dot(sol.ray_lambda);
      if (!(value > 0.0)) throw InvariantError("phase-1 infeasibility without a Farkas certificate");
      sol.ray_pi /= value;
      sol.ray_lambda /= value;
      return sol;
    }
    spx.drive_out(is_art, structural);
  }

  Vector cost2 = Vector::Zero(cols);
  cost2.head(n) = lp.c;
  if (spx.run(cost2, structural) == Simplex::Result::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    sol.iterations = spx.pivots();
    return sol;
  }
  spx.refactor();
  const Vector x = spx.primal();
  Vector v = to_original(spx.duals(cost2));
  sol.status = LpStatus::kOptimal;
  sol.iterations = spx.pivots();
  sol.y = lp.lo + x.head(n);
  sol.objective = lp.c.dot(sol.y);
  const Vector vA = v.head(me);
  const Vector vC = v.segment(me, mc);
  const Vector vt = v.tail(n);
  sol.pi = vA;
  const Vector lam_c = -vC;
  const Vector lam_hi = -vt;
  const Vector lam_lo = lp.c - lp.A.transpose() * vA + lp.C.transpose() * lam_c + lam_hi;
  sol.lambda.resize(mc + 2 * n);
  sol.lambda << lam_c.cwiseMax(0.0), lam_hi.cwiseMax(0.0), lam_lo.cwiseMax(0.0);
  return sol;
}

double check_kkt(const LpSolution& sol, const LpProblem& lp) {
  check_shapes(lp);
  const Eigen::Index n = lp.c.size();
  const Eigen::Index mc = lp.C.rows();
  Matrix Cf(mc + 2 * n, n);
  Cf << lp.C, Matrix::Identity(n, n), -Matrix::Identity(n, n);
  const Vector df = folded_rhs(lp);
  auto inf_norm = [](const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
  auto neg_part = [](const Vector& v) { return v.size() ? std::max(0.0, -v.minCoeff()) : 0.0; };

  if (sol.status == LpStatus::kInfeasible) {
    if (sol.ray_pi.size() != lp.A.rows() || sol.ray_lambda.size() != Cf.rows()) return 1.0;
    double r = inf_norm(lp.A.transpose() * sol.ray_pi - Cf.transpose() * sol.ray_lambda);
    r = std::max(r, neg_part(sol.ray_lambda));
    const double value = lp.b.dot(sol.ray_pi) - df.dot(sol.ray_lambda);
    if (!(value > 0.0)) r = std::max(r, 1.0);
    return r;
  }
  if (sol.status != LpStatus::kOptimal) return std::numeric_limits<double>::infinity();
  if (sol.y.size() != n || sol.pi.size() != lp.A.rows() || sol.lambda.size() != Cf.rows()) return 1.0;

  double r = 0.0;
  const Vector slack = df - Cf * sol.y;
  r = std::max(r, inf_norm(lp.A * sol.y - lp.b));
  r = std::max(r, neg_part(slack));
  r = std::max(r, inf_norm(lp.A.transpose() * sol.pi - Cf.transpose() * sol.lambda - lp.c));
  r = std::max(r, neg_part(sol.lambda));
  r = std::max(r, inf_norm(sol.lambda.cwiseProduct(slack)));
  const double dual_value = lp.b.dot(sol.pi) - df.dot(sol.lambda);
  const double primal_value = lp.c.dot(sol.y);
  r = std::max(r, std::abs(primal_value - dual_value) / std::max(1.0, std::abs(primal_value)));
  return r;
}

}  // namespace certiq
