#include "certiq/solvers.hpp"

#include <cmath>
#include <string>

#include "certiq/error.hpp"

namespace certiq {

SolverKind parse_solver(std::string_view name) {
  if (name == "enumerate") return SolverKind::kEnumerate;
  if (name == "qubo-sa") return SolverKind::kQuboSa;
  if (name == "benders") return SolverKind::kBenders;
  throw Error("unknown solver '" + std::string(name) + "' (expected enumerate, qubo-sa or benders)");
}

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kEnumerate: return "enumerate";
    case SolverKind::kQuboSa: return "qubo-sa";
    case SolverKind::kBenders: return "benders";
  }
  return "?";
}

SystemOptimum solve_system(const MixedConstraintSystem& sys, const SolverSettings& settings) {
  switch (settings.kind) {
    case SolverKind::kEnumerate: {
      EnumerateOptions opt = settings.enumerate;
      opt.budget_ms = settings.budget_ms;
      return solve_enumerate(sys, opt);
    }
    case SolverKind::kBenders: {
      BendersOptions opt = settings.benders;
      opt.budget_ms = settings.budget_ms;
      return to_system_optimum(run_benders(sys, opt));
    }
    case SolverKind::kQuboSa: {
      const BitEncoding enc = make_encoding(sys, settings.qubo.bits_per_var, settings.qubo.bits_per_slack,
                                            {.drop_vacuous_rows = settings.qubo.drop_vacuous_rows});
      const QuboInstance inst = assemble(sys, enc, choose_rho(sys, enc));
      AnnealConfig cfg = settings.anneal;
      cfg.budget_ms = settings.budget_ms;
      const AnnealResult ar = solve_sa(inst.model, cfg);
      const Decoded d = decode(inst, ar.bits);
      SystemOptimum o;
      o.complete = false;
      o.y = d.y;
      o.beta = d.beta;
      o.upper_bound = d.objective;
      double row_scale = 0.0;
      if (inst.M_eq.size() > 0) row_scale = inst.M_eq.cwiseAbs().rowwise().sum().maxCoeff();
      o.feasible = d.residual <= std::max(1e-9, enc.resolution() * row_scale);
      return o;
    }
  }
  throw Error("unknown solver");
}

}  // namespace certiq
