#include "certiq/partition.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "certiq/error.hpp"

namespace certiq {

namespace {

struct Split {
  Network suffix;
  Box box;
};

Split make_split(const Network& net, const Vector& x0, double eps, int cut) {
  const Box ball = Box::ball(x0, eps);
  if (cut == 0) return {net, ball};
  if (cut < 1 || cut > net.num_layers() - 1) {
    throw Error("partition cut must lie in [1, " + std::to_string(net.num_layers() - 1) + "]");
  }
  const IntervalBounds b = propagate(net, ball);
  return {net.slice(cut, net.num_layers()), Box{b.a_lo[cut], b.a_hi[cut]}};
}

}  // namespace

int partition_spins(const Network& net, const Vector& x0, double eps, int label, int cut,
                    const EncodeOptions& encode, const QuboSettings& qubo) {
  const Split s = make_split(net, x0, eps, cut);
  int spins = 0;
  for (int t = 0; t < net.output_dim(); ++t) {
    if (t == label) continue;
    spins = std::max(spins, spin_count(build_pair_system(s.suffix, {s.box, label, t}, encode), qubo));
  }
  return spins;
}

PartitionReport split_verify(const Network& net, const Vector& x0, double eps, int label, int cut,
                             const EncodeOptions& encode, const SolverSettings& solver) {
  if (cut < 1 || cut > net.num_layers() - 1) {
    throw Error("partition cut must lie in [1, " + std::to_string(net.num_layers() - 1) + "]");
  }
  const Split s = make_split(net, x0, eps, cut);
  PartitionReport rep;
  rep.cut = cut;
  rep.prefix_box = s.box;
  rep.lower_bound = std::numeric_limits<double>::infinity();
  bool complete = true;
  for (int t = 0; t < net.output_dim(); ++t) {
    if (t == label) continue;
    const MixedConstraintSystem sys = build_pair_system(s.suffix, {s.box, label, t}, encode);
    rep.suffix_spins = std::max(rep.suffix_spins, spin_count(sys, solver.qubo));
    const SystemOptimum opt = solve_system(sys, solver);
    complete = complete && opt.complete;
    rep.target_bounds.push_back(opt.lower_bound);
    rep.lower_bound = std::min(rep.lower_bound, opt.lower_bound);
  }
  rep.full_spins = partition_spins(net, x0, eps, label, 0, encode, solver.qubo);
  rep.verdict = complete && rep.lower_bound > 0.0 ? Verdict::kRobust : Verdict::kUnknown;
  return rep;
}

int suggest_cut(const Network& net, int spin_budget, const Vector& x0, double eps, int label,
                const EncodeOptions& encode, const QuboSettings& qubo) {
  if (partition_spins(net, x0, eps, label, 0, encode, qubo) <= spin_budget) return 0;
  for (int cut = 1; cut <= net.num_layers() - 1; ++cut) {
    if (partition_spins(net, x0, eps, label, cut, encode, qubo) <= spin_budget) return cut;
  }
  throw Error("no partition fits a budget of " + std::to_string(spin_budget) + " spins");
}

}  // namespace certiq
