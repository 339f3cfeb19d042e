#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "certiq/dataset.hpp"
#include "certiq/encoding.hpp"
#include "certiq/solvers.hpp"

namespace certiq {

struct VerifyOptions {
  EncodeOptions encode;
  SolverSettings solver;
  double budget_ms = 5000.0;  // per sample
  int partition_at = 0;       // 0: no split
  int spin_budget = 0;        // > 0: pick the cut with suggest_cut
  int threads = 1;
};

struct SampleReport {
  int index = 0;
  int label = 0;
  int predicted = 0;
  Verdict verdict = Verdict::kUnknown;
  double lower_bound = 0.0;  // certified bound on the robust margin (may be -inf)
  double upper_bound = 0.0;  // smallest replayed margin seen
  bool has_counterexample = false;
  Vector counterexample;
  double replayed_margin = 0.0;
  int spins = 0;
  int partition_cut = 0;
  bool ibp_certified = false;
  bool budget_exhausted = false;
  std::string solver;
  double wall_ms = 0.0;
};

SampleReport verify_sample(const Network& net, const Vector& x0, int label, double eps, const VerifyOptions& options,
                           int index = 0);

struct EpsReport {
  double eps = 0.0;
  std::vector<SampleReport> samples;
  double certified_accuracy = 0.0;
  int robust = 0;
  int vulnerable = 0;
  int unknown = 0;
  double spin_mean = 0.0;
  int spin_min = 0;
  int spin_max = 0;
  double wall_ms = 0.0;
};

struct CampaignReport {
  int model = 1;
  std::string solver;
  std::vector<double> eps_grid;
  std::vector<EpsReport> results;
};

// Verifies every sample at every radius. Samples run on `threads` workers;
// results stay ordered by sample index.
CampaignReport run_campaign(const Network& net, const Dataset& data, const std::vector<double>& eps_grid,
                            const VerifyOptions& options);

EpsReport summarize(double eps, std::vector<SampleReport> samples);

nlohmann::json sample_to_json(const SampleReport& s);
nlohmann::json campaign_to_json(const CampaignReport& r);

}  // namespace certiq
