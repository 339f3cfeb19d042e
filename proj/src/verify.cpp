#include "certiq/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "certiq/error.hpp"
#include "certiq/partition.hpp"
#include "certiq/train.hpp"

namespace certiq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SampleReport verify_sample(const Network& net, const Vector& x0, int label, double eps, const VerifyOptions& options,
                           int index) {
  const auto start = std::chrono::steady_clock::now();
  SampleReport rep;
  rep.index = index;
  rep.label = label;
  rep.solver = solver_name(options.solver.kind);
  if (label < 0 || label >= net.output_dim()) throw Error("label out of range for the network");
  const Box ball = Box::ball(x0, eps);
  const Vector logits = forward_eval(net, x0);
  rep.predicted = predict(net, x0);
  rep.upper_bound = logit_margin(logits, label);
  rep.lower_bound = -kInf;

  int cut = options.partition_at;
  if (cut == 0 && options.spin_budget > 0) {
    cut = suggest_cut(net, options.spin_budget, x0, eps, label, options.encode, options.solver.qubo);
  }
  rep.partition_cut = cut;
  rep.spins = partition_spins(net, x0, eps, label, cut, options.encode, options.solver.qubo);

  auto finish = [&](Verdict v) {
    rep.verdict = v;
    rep.wall_ms = elapsed_ms(start);
    return rep;
  };

  // the nominal point itself already violates the property
  if (rep.upper_bound <= 0.0) {
    rep.has_counterexample = true;
    rep.counterexample = x0;
    rep.replayed_margin = rep.upper_bound;
    return finish(Verdict::kNonrobust);
  }

  const IntervalBounds bounds = propagate(net, ball);
  double ibp = kInf;
  std::vector<double> ibp_target(net.output_dim(), kInf);
  for (int t = 0; t < net.output_dim(); ++t) {
    if (t == label) continue;
    ibp_target[t] = ibp_pair_margin_lower(bounds, label, t);
    ibp = std::min(ibp, ibp_target[t]);
  }
  rep.lower_bound = ibp;
  if (ibp > 0.0) {
    rep.ibp_certified = true;
    return finish(Verdict::kRobust);
  }

  if (cut > 0) {
    SolverSettings s = options.solver;
    s.budget_ms = options.budget_ms;
    const PartitionReport pr = split_verify(net, x0, eps, label, cut, options.encode, s);
    rep.lower_bound = std::max(ibp, pr.lower_bound);
    return finish(pr.verdict);
  }

  const Deadline deadline(options.budget_ms);
  bool complete = true;
  double lower = kInf;
  for (int t = 0; t < net.output_dim(); ++t) {
    if (t == label) continue;
    if (deadline.expired()) {
      rep.budget_exhausted = true;
      complete = false;
      break;
    }
    const MixedConstraintSystem sys = build_pair_system(net, {ball, label, t}, options.encode);
    SolverSettings s = options.solver;
    s.budget_ms = options.budget_ms > 0.0 ? std::max(1.0, options.budget_ms - elapsed_ms(start)) : 0.0;
    const SystemOptimum opt = solve_system(sys, s);
    complete = complete && opt.complete;
    lower = std::min(lower, std::max(ibp_target[t], opt.lower_bound));
    if (opt.y.size() > 0) {
      const Vector x = ball.clamp(sys.input_point(opt.y));
      const double m = logit_margin(forward_eval(net, x), label);
      rep.upper_bound = std::min(rep.upper_bound, m);
      if (m <= 0.0) {
        rep.has_counterexample = true;
        rep.counterexample = x;
        rep.replayed_margin = m;
        rep.lower_bound = std::min(lower, m);
        return finish(Verdict::kNonrobust);
      }
    }
  }
  if (deadline.expired() && !complete) rep.budget_exhausted = true;
  rep.lower_bound = std::max(ibp, std::min(lower, rep.upper_bound));
  return finish(complete && lower > 0.0 ? Verdict::kRobust : Verdict::kUnknown);
}

EpsReport summarize(double eps, std::vector<SampleReport> samples) {
  EpsReport r;
  r.eps = eps;
  r.samples = std::move(samples);
  if (r.samples.empty()) return r;
  r.spin_min = std::numeric_limits<int>::max();
  double spins = 0.0;
  for (const SampleReport& s : r.samples) {
    r.robust += s.verdict == Verdict::kRobust;
    r.vulnerable += s.verdict == Verdict::kNonrobust;
    r.unknown += s.verdict == Verdict::kUnknown;
    spins += s.spins;
    r.spin_min = std::min(r.spin_min, s.spins);
    r.spin_max = std::max(r.spin_max, s.spins);
    r.wall_ms += s.wall_ms;
  }
  const double n = static_cast<double>(r.samples.size());
  r.certified_accuracy = r.robust / n;
  r.spin_mean = spins / n;
  return r;
}

CampaignReport run_campaign(const Network& net, const Dataset& data, const std::vector<double>& eps_grid,
                            const VerifyOptions& options) {
  if (data.num_features() != net.input_dim()) throw Error("dataset features do not match the network input");
  CampaignReport rep;
  rep.model = options.encode.model;
  rep.solver = solver_name(options.solver.kind);
  rep.eps_grid = eps_grid;
  for (double eps : eps_grid) {
    if (eps < 0.0) throw Error("eps must be non-negative");
    std::vector<SampleReport> out(data.size());
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (int i = next++; i < data.size(); i = next++) {
        try {
          out[i] = verify_sample(net, data.x[i], data.y[i], eps, options, i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int threads = std::max(1, std::min(options.threads, data.size()));
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    rep.results.push_back(summarize(eps, std::move(out)));
  }
  return rep;
}

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json sample_to_json(const SampleReport& s) {
  nlohmann::json j;
  j["index"] = s.index;
  j["label"] = s.label;
  j["predicted"] = s.predicted;
  j["verdict"] = verdict_name(s.verdict);
  j["lower_bound"] = number(s.lower_bound);
  j["upper_bound"] = number(s.upper_bound);
  if (s.has_counterexample) {
    j["counterexample"] = std::vector<double>(s.counterexample.data(), s.counterexample.data() + s.counterexample.size());
    j["replayed_margin"] = s.replayed_margin;
  }
  j["spins"] = s.spins;
  j["partition_cut"] = s.partition_cut;
  j["ibp_certified"] = s.ibp_certified;
  j["budget_exhausted"] = s.budget_exhausted;
  j["solver"] = s.solver;
  j["wall_ms"] = s.wall_ms;
  return j;
}

nlohmann::json campaign_to_json(const CampaignReport& r) {
  nlohmann::json doc;
  doc["model"] = r.model;
  doc["solver"] = r.solver;
  doc["eps_grid"] = r.eps_grid;
  nlohmann::json results = nlohmann::json::array();
  for (const EpsReport& e : r.results) {
    nlohmann::json j;
    j["eps"] = e.eps;
    j["certified_accuracy"] = e.certified_accuracy;
    j["robust"] = e.robust;
    j["vulnerable"] = e.vulnerable;
    j["unknown"] = e.unknown;
    j["spins"] = {{"mean", e.spin_mean}, {"min", e.spin_min}, {"max", e.spin_max}};
    j["wall_ms"] = e.wall_ms;
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleReport& s : e.samples) samples.push_back(sample_to_json(s));
    j["samples"] = samples;
    results.push_back(j);
  }
  doc["results"] = results;
  return doc;
}

}  // namespace certiq
