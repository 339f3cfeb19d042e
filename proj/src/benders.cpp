#include "certiq/benders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "certiq/error.hpp"

namespace certiq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cut_scale(double v) { return std::max(1.0, std::abs(v)); }

}  // namespace

SubproblemResult subproblem(const MixedConstraintSystem& sys, const Vector& beta) {
  if (!is_onehot_valid(beta, sys.onehot_groups)) throw Error("subproblem beta violates the one-hot groups");
  const LpProblem lp = subproblem_lp(sys, beta);
  SubproblemResult res;
  res.lp = solve_lp(lp);
  const int mc = sys.num_ineq();
  const int n = sys.num_continuous();
  const Vector& lo = sys.layout.lo;
  const Vector& hi = sys.layout.hi;
  auto assemble = [&](const Vector& pi, const Vector& lambda, BendersCut& cut) {
    const Vector lc = lambda.head(mc);
    const Vector lhi = lambda.segment(mc, n);
    const Vector llo = lambda.tail(n);
    cut.constant = sys.b0.dot(pi) - sys.d0.dot(lc) - hi.dot(lhi) + lo.dot(llo);
    cut.coef = sys.B.transpose() * pi - sys.D.transpose() * lc;
    cut.origin = beta;
  };

  switch (res.lp.status) {
    case LpStatus::kOptimal: {
      res.feasible = true;
      res.value = res.lp.objective + sys.objective_offset;
      const double kkt = check_kkt(res.lp, lp);
      if (kkt > 1e-6 * cut_scale(res.value)) {
        throw InvariantError("subproblem KKT residual " + std::to_string(kkt) + " too large for a cut");
      }
      res.cut.kind = CutKind::kOptimality;
      assemble(res.lp.pi, res.lp.lambda, res.cut);
      res.cut.constant += sys.objective_offset;
      const double at = res.cut.value(beta);
      if (std::abs(at - res.value) > 1e-6 * cut_scale(res.value)) {
        throw InvariantError("optimality cut misses SP(beta): " + std::to_string(at) + " vs " +
                             std::to_string(res.value));
      }
      break;
    }
    case LpStatus::kInfeasible: {
      res.feasible = false;
      res.value = kInf;
      if (check_kkt(res.lp, lp) > 1e-6) throw InvariantError("invalid Farkas certificate");
      res.cut.kind = CutKind::kFeasibility;
      assemble(res.lp.ray_pi, res.lp.ray_lambda, res.cut);
      if (!(res.cut.value(beta) > 0.0)) throw InvariantError("feasibility cut does not exclude its beta");
      break;
    }
    case LpStatus::kUnbounded:
      throw InvariantError("subproblem unbounded despite finite boxes");
  }
  return res;
}

double master_value(const MasterProblem& mp, const std::vector<BendersCut>& cuts, const Vector& beta) {
  double theta = mp.theta_floor;
  for (const BendersCut& c : cuts) {
    const double v = c.value(beta);
    if (c.kind == CutKind::kFeasibility) {
      if (v > 1e-9) return kInf;
    } else {
      theta = std::max(theta, v);
    }
  }
  return theta;
}

namespace {

MasterResult master_exhaustive(const MasterProblem& mp, const std::vector<BendersCut>& cuts) {
  MasterResult best;
  best.certified = true;
  best.theta = kInf;
  // strict improvement keeps the first minimiser in enumeration order
  for_each_onehot_beta(mp.num_binary, mp.onehot_groups, [&](const Vector& beta) {
    const double t = master_value(mp, cuts, beta);
    if (t < best.theta) {
      best.theta = t;
      best.beta = beta;
      best.feasible = true;
    }
    return true;
  });
  return best;
}

// Largest value a cut can take over one-hot-valid beta.
double cut_max(const MasterProblem& mp, const BendersCut& c) {
  std::vector<bool> grouped(mp.num_binary, false);
  double v = c.constant;
  for (const auto& g : mp.onehot_groups) {
    double m = -kInf;
    for (int k : g) {
      grouped[k] = true;
      m = std::max(m, c.coef[k]);
    }
    if (!g.empty()) v += m;
  }
  for (int k = 0; k < mp.num_binary; ++k) {
    if (!grouped[k]) v += std::max(0.0, c.coef[k]);
  }
  return v;
}

// Group-wise coordinate descent on the exact master value.
void repair(const MasterProblem& mp, const std::vector<BendersCut>& cuts, Vector& beta) {
  std::vector<bool> grouped(mp.num_binary, false);
  for (const auto& g : mp.onehot_groups) {
    int on = -1;
    for (int k : g) {
      grouped[k] = true;
      if (beta[k] > 0.5 && on < 0) on = k;
    }
    for (int k : g) beta[k] = 0.0;
    if (!g.empty()) beta[on >= 0 ? on : g.front()] = 1.0;
  }
  for (int k = 0; k < mp.num_binary; ++k) {
    if (!grouped[k]) beta[k] = beta[k] > 0.5 ? 1.0 : 0.0;
  }
  double current = master_value(mp, cuts, beta);
  for (int pass = 0; pass < 4; ++pass) {
    bool improved = false;
    for (const auto& g : mp.onehot_groups) {
      int on = -1;
      for (int k : g) {
        if (beta[k] > 0.5) on = k;
      }
      for (int k : g) {
        if (k == on) continue;
        beta[on] = 0.0;
        beta[k] = 1.0;
        const double v = master_value(mp, cuts, beta);
        if (v < current) {
          current = v;
          on = k;
          improved = true;
        } else {
          beta[k] = 0.0;
          beta[on] = 1.0;
        }
      }
    }
    if (!improved) break;
  }
}

MasterResult master_anneal(const MasterProblem& mp, const std::vector<BendersCut>& cuts,
                           const MasterOptions& options) {
  double ceiling = std::max(mp.theta_ceiling, mp.theta_floor);
  for (const BendersCut& c : cuts) {
    if (c.kind == CutKind::kOptimality) ceiling = std::max(ceiling, cut_max(mp, c));
  }
  SystemBuilder sb;
  const int theta = sb.layout().add_column({ColumnRole::kAuxiliary, 0, 0, -1}, mp.theta_floor, ceiling);
  for (int k = 0; k < mp.num_binary; ++k) sb.layout().add_selector({SelectorFamily::kFree, 0, k, 0});
  for (const auto& g : mp.onehot_groups) sb.add_onehot(g);
  for (const BendersCut& c : cuts) {
    std::vector<SystemBuilder::Term> beta;
    for (int k = 0; k < mp.num_binary; ++k) {
      if (c.coef[k] != 0.0) beta.push_back({k, -c.coef[k]});
    }
    if (c.kind == CutKind::kOptimality) {
      sb.add_inequality(RowKind::kCut, {{theta, -1.0}}, -c.constant, std::move(beta));
    } else {
      sb.add_inequality(RowKind::kCut, {}, -c.constant, std::move(beta));
    }
  }
  sb.set_objective({{theta, 1.0}}, 0.0);
  const MixedConstraintSystem sys = sb.finish();
  BitEncoding enc;
  try {
    enc = make_encoding(sys, options.theta_bits, options.slack_bits, {.drop_vacuous_rows = true});
  } catch (const Error&) {
    return master_exhaustive(mp, cuts);  // some cut row is unsatisfiable: let enumeration decide
  }
  const QuboInstance inst = assemble(sys, enc, choose_rho(sys, enc));
  const AnnealResult ar = solve_sa(inst.model, options.anneal);
  Decoded d = decode(inst, ar.bits);
  MasterResult res;
  res.beta = d.beta;
  repair(mp, cuts, res.beta);
  res.theta = master_value(mp, cuts, res.beta);
  res.feasible = std::isfinite(res.theta);
  res.certified = false;
  return res;
}

std::vector<char> key_of(const Vector& beta) {
  std::vector<char> k(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) k[i] = beta[i] > 0.5;
  return k;
}

}  // namespace

MasterResult solve_master(const MasterProblem& mp, const std::vector<BendersCut>& cuts,
                          const MasterOptions& options) {
  for (const BendersCut& c : cuts) {
    if (c.coef.size() != mp.num_binary) throw Error("cut length does not match the master");
  }
  return options.mode == MasterMode::kExhaustive ? master_exhaustive(mp, cuts)
                                                 : master_anneal(mp, cuts, options);
}

BendersResult run_benders(const MixedConstraintSystem& sys, const BendersOptions& options) {
  if (!(options.tol > 0.0)) throw Error("Benders tolerance must be positive");
  MasterProblem mp;
  mp.num_binary = sys.num_binary();
  mp.onehot_groups = sys.onehot_groups;
  mp.theta_floor = box_objective_lower(sys);
  mp.theta_ceiling = box_objective_upper(sys);
  const std::size_t space = count_onehot_assignments(sys);
  const bool can_enumerate = space <= options.exhaustive_limit;

  BendersResult res;
  res.lower_bound = mp.theta_floor;
  res.upper_bound = kInf;
  std::set<std::vector<char>> visited;
  Deadline deadline(options.budget_ms);
  MasterOptions exhaustive = options.master;
  exhaustive.mode = MasterMode::kExhaustive;

  for (int it = 1; it <= options.max_iter; ++it) {
    if (deadline.expired()) return res;
    res.iterations = it;
    MasterResult m;
    if (options.master.mode == MasterMode::kExhaustive) {
      m = solve_master(mp, res.cuts, exhaustive);
    } else {
      MasterOptions anneal = options.master;
      anneal.anneal.seed += static_cast<std::uint64_t>(it) * 7919;
      MasterProblem capped = mp;
      if (std::isfinite(res.upper_bound)) capped.theta_ceiling = res.upper_bound;
      m = solve_master(capped, res.cuts, anneal);
      if (!m.feasible || visited.count(key_of(m.beta))) {
        // no fresh proposal: settle the master exactly if the space allows it
        if (!can_enumerate) return res;
        m = solve_master(mp, res.cuts, exhaustive);
      }
    }
    if (!m.feasible) {
      res.status = BendersStatus::kInfeasible;
      res.lower_bound = res.upper_bound = kInf;
      return res;
    }
    if (m.certified) res.lower_bound = std::max(res.lower_bound, m.theta);

    BendersStep step;
    step.iteration = it;
    step.beta = m.beta;
    step.master_certified = m.certified;
    if (res.upper_bound - res.lower_bound <= options.tol) {
      step.lower = res.lower_bound;
      step.upper = res.upper_bound;
      res.trail.push_back(step);
      res.status = BendersStatus::kOptimal;
      return res;
    }
    if (!visited.insert(key_of(m.beta)).second) {
      // a certified master never repeats a beta before convergence
      throw InvariantError("Benders master revisited a beta without closing the gap");
    }
    SubproblemResult sp = subproblem(sys, m.beta);
    if (sp.feasible && sp.value < res.upper_bound) {
      res.upper_bound = sp.value;
      res.y = sp.lp.y;
      res.beta = m.beta;
    }
    res.cuts.push_back(sp.cut);
    step.cut = sp.cut;
    step.has_cut = true;
    step.lower = res.lower_bound;
    step.upper = res.upper_bound;
    res.trail.push_back(step);
    if (res.upper_bound - res.lower_bound <= options.tol) {
      res.status = BendersStatus::kOptimal;
      return res;
    }
  }
  return res;
}

SystemOptimum to_system_optimum(const BendersResult& r) {
  SystemOptimum o;
  o.feasible = std::isfinite(r.upper_bound);
  o.complete = r.status != BendersStatus::kIncomplete;
  o.lower_bound = r.lower_bound;
  o.upper_bound = r.upper_bound;
  o.y = r.y;
  o.beta = r.beta;
  o.lp_solves = r.cuts.size();
  return o;
}

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string trail_to_json(const BendersResult& r) {
  using nlohmann::json;
  json doc;
  doc["status"] = r.status == BendersStatus::kOptimal     ? "optimal"
                  : r.status == BendersStatus::kInfeasible ? "infeasible"
                                                           : "incomplete";
  doc["lower_bound"] = number(r.lower_bound);
  doc["upper_bound"] = number(r.upper_bound);
  doc["iterations"] = r.iterations;
  json steps = json::array();
  for (const BendersStep& s : r.trail) {
    json j;
    j["iteration"] = s.iteration;
    std::vector<int> on;
    for (Eigen::Index k = 0; k < s.beta.size(); ++k) {
      if (s.beta[k] > 0.5) on.push_back(static_cast<int>(k));
    }
    j["beta_on"] = on;
    j["lower"] = number(s.lower);
    j["upper"] = number(s.upper);
    j["master_certified"] = s.master_certified;
    if (s.has_cut) {
      j["cut"] = {{"kind", s.cut.kind == CutKind::kOptimality ? "optimality" : "feasibility"},
                  {"constant", s.cut.constant},
                  {"coef", std::vector<double>(s.cut.coef.data(), s.cut.coef.data() + s.cut.coef.size())}};
    }
    steps.push_back(j);
  }
  doc["steps"] = steps;
  return doc.dump(2);
}

}  // namespace certiq
