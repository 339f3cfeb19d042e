#include "certiq/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "certiq/error.hpp"

namespace certiq {

double compute_tau(const Network& pruned, const std::vector<Matrix>& residuals, const std::vector<double>& H) {
  const int L = pruned.num_layers();
  if (static_cast<int>(residuals.size()) != L) throw Error("one residual matrix per layer required");
  if (static_cast<int>(H.size()) < L) throw Error("activation bounds H_0..H_{L-1} required");
  for (int l = 0; l < L; ++l) {
    const Matrix& w = pruned.layer(l).weights;
    if (residuals[l].rows() != w.rows() || residuals[l].cols() != w.cols()) {
      throw Error("residual shape mismatch at layer " + std::to_string(l + 1));
    }
  }
  // suffix[l] = prod_{j > l} |W'_j|, built from the output side
  std::vector<double> suffix(L + 1, 1.0);
  for (int l = L - 1; l >= 1; --l) suffix[l] = suffix[l + 1] * op_norm_inf(pruned.layer(l).weights);
  double tau = 0.0;
  for (int l = 1; l <= L; ++l) {
    const double d = op_norm_inf(residuals[l - 1]);
    if (d == 0.0) continue;
    tau += suffix[l] * d * H[l - 1];
  }
  return tau;
}

double compute_tau(const PrunedNetwork& pn, const std::vector<double>& H) {
  return compute_tau(pn.pruned, pn.residuals, H);
}

const char* transfer_verdict_name(TransferVerdict v) {
  switch (v) {
    case TransferVerdict::kCertifiedRobust: return "certified-robust";
    case TransferVerdict::kCertifiedNonrobust: return "certified-nonrobust";
    case TransferVerdict::kUndecided: return "undecided";
  }
  return "?";
}

TransferBounds transfer_margin_bounds(double L_g, double U_g, double tau) {
  if (!(tau >= 0.0)) throw Error("tau must be non-negative");
  if (L_g > U_g) throw Error("lower margin bound exceeds the upper bound");
  TransferBounds b;
  b.lower = L_g - 2.0 * tau;
  b.upper = U_g + 2.0 * tau;
  if (L_g > 2.0 * tau) b.verdict = TransferVerdict::kCertifiedRobust;
  else if (U_g <= -2.0 * tau) b.verdict = TransferVerdict::kCertifiedNonrobust;
  return b;
}

DatasetBounds dataset_bounds(const std::vector<TransferSample>& samples) {
  if (samples.empty()) throw Error("dataset bounds need at least one sample");
  DatasetBounds d;
  d.total = static_cast<int>(samples.size());
  for (const TransferSample& s : samples) {
    if (s.L_g > 2.0 * s.tau) ++d.certified_robust;
    if (s.U_g <= -2.0 * s.tau) ++d.certified_nonrobust;
  }
  d.ca_lower = static_cast<double>(d.certified_robust) / d.total;
  d.ca_upper = 1.0 - static_cast<double>(d.certified_nonrobust) / d.total;
  return d;
}

TransferCertificate certify_transfer(const Network& net, const PrunedNetwork& pn, const Vector& x0, int label,
                                     double eps, const EncodeOptions& encode, const SolverSettings& solver) {
  const Box ball = Box::ball(x0, eps);
  const IntervalBounds fb = propagate(net, ball);
  TransferCertificate cert;
  cert.tau = compute_tau(pn, activation_sup_bounds(fb));

  const Network& g = pn.pruned;
  const IntervalBounds gb = propagate(g, ball);
  cert.L_g = std::numeric_limits<double>::infinity();
  cert.U_g = logit_margin(forward_eval(g, x0), label);
  for (int t = 0; t < g.output_dim(); ++t) {
    if (t == label) continue;
    // interval bounds give a cheap certificate before any solver runs
    const double ibp = ibp_pair_margin_lower(gb, label, t);
    const MixedConstraintSystem sys = build_pair_system(g, {ball, label, t}, encode);
    const SystemOptimum opt = solve_system(sys, solver);
    cert.complete = cert.complete && opt.complete;
    cert.L_g = std::min(cert.L_g, std::max(ibp, opt.lower_bound));
    if (opt.y.size() > 0) {
      const Vector x = ball.clamp(sys.input_point(opt.y));
      cert.U_g = std::min(cert.U_g, logit_margin(forward_eval(g, x), label));
    }
  }
  cert.L_g = std::min(cert.L_g, cert.U_g);
  cert.bounds = transfer_margin_bounds(cert.L_g, cert.U_g, cert.tau);
  return cert;
}

}  // namespace certiq
