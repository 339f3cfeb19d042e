// certiq command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "certiq/anneal.hpp"
#include "certiq/benders.hpp"
#include "certiq/dataset.hpp"
#include "certiq/encoding.hpp"
#include "certiq/error.hpp"
#include "certiq/qubo.hpp"
#include "certiq/train.hpp"
#include "certiq/transfer.hpp"
#include "certiq/verify.hpp"

using namespace certiq;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("'" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

// Options shared by the subcommands that build constraint systems.
struct Common {
  std::string net_path;
  std::string data_path;
  std::string x_text;
  int index = -1;
  int label = -1;
  double eps = 0.1;
  int model = 1;
  int segments = 4;
  bool one_sided = false;
  std::string solver = "benders";
  std::string master = "exhaustive";
  int bits = 4;
  int slack_bits = 4;
  double budget_ms = 5000.0;
  std::uint64_t seed = 0;
  int restarts = 20;
  int sweeps = 2000;
  std::string keep_classes;
  std::string out;

  void add_net(CLI::App* app) { app->add_option("--net", net_path, "network JSON")->required(); }
  void add_point(CLI::App* app) {
    app->add_option("--data", data_path, "dataset CSV");
    app->add_option("--index", index, "sample index in the dataset");
    app->add_option("--x", x_text, "input point as comma-separated values");
    app->add_option("--label", label, "true label (defaults to the dataset label or the prediction)");
  }
  void add_encoding(CLI::App* app) {
    app->add_option("--eps", eps, "l-infinity radius");
    app->add_option("--model", model, "1 = exact piecewise-linear, 2 = step bounds")->check(CLI::IsMember({1, 2}));
    app->add_option("--segments", segments, "segments per neuron for model 2");
    app->add_flag("--one-sided", one_sided, "model 2: emit only the bound family the margin needs");
  }
  void add_solver(CLI::App* app) {
    app->add_option("--solver", solver, "enumerate | qubo-sa | benders");
    app->add_option("--master", master, "Benders master: exhaustive | anneal");
    app->add_option("--bits", bits, "bits per continuous variable");
    app->add_option("--slack-bits", slack_bits, "bits per slack");
    app->add_option("--budget-ms", budget_ms, "time budget per sample");
    app->add_option("--seed", seed, "annealing seed");
    app->add_option("--restarts", restarts, "annealing restarts");
    app->add_option("--sweeps", sweeps, "annealing sweeps per restart");
  }

  Dataset dataset() const {
    Dataset d = load_csv(data_path);
    if (!keep_classes.empty()) d = filter_classes(d, parse_int_list(keep_classes));
    return d;
  }

  // (x0, label) from --x/--label or --data/--index.
  std::pair<Vector, int> point(const Network& net) const {
    Vector x;
    int y = label;
    if (!x_text.empty()) {
      x = to_vector(parse_list(x_text));
    } else if (!data_path.empty() && index >= 0) {
      const Dataset d = dataset();
      if (index >= d.size()) throw Error("sample index out of range");
      x = d.x[index];
      if (y < 0) y = d.y[index];
    } else {
      throw Error("give either --x or --data with --index");
    }
    if (x.size() != net.input_dim()) throw Error("input point has the wrong dimension");
    if (y < 0) y = predict(net, x);
    return {x, y};
  }

  EncodeOptions encode() const { return {model, segments, one_sided}; }

  SolverSettings settings() const {
    SolverSettings s;
    s.kind = parse_solver(solver);
    s.qubo = {bits, slack_bits, true};
    s.anneal.seed = seed;
    s.anneal.restarts = restarts;
    s.anneal.sweeps = sweeps;
    s.benders.master.anneal = s.anneal;
    if (master == "anneal") s.benders.master.mode = MasterMode::kAnneal;
    else if (master != "exhaustive") throw Error("master must be exhaustive or anneal");
    return s;
  }

  VerifyOptions verify_options() const {
    VerifyOptions v;
    v.encode = encode();
    v.solver = settings();
    v.budget_ms = budget_ms;
    return v;
  }
};

json box_json(const Vector& lo, const Vector& hi) { return {{"lo", to_std(lo)}, {"hi", to_std(hi)}}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certiq: robustness verification of small feedforward classifiers"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Common c;

  // gen
  auto* gen = app.add_subcommand("gen", "generate or normalise a dataset");
  std::string kind = "two-moons";
  int n = 100;
  double noise = 0.1;
  std::string csv_in;
  gen->add_option("--kind", kind, "two-moons | csv")->check(CLI::IsMember({"two-moons", "csv"}));
  gen->add_option("--n", n, "number of points");
  gen->add_option("--seed", c.seed, "random seed");
  gen->add_option("--noise", noise, "Gaussian noise level");
  gen->add_option("--in", csv_in, "CSV input for --kind csv");
  gen->add_option("--keep-classes", c.keep_classes, "comma-separated classes to keep");
  gen->add_option("--out", c.out, "output CSV");

  // train
  auto* train = app.add_subcommand("train", "train a fixture network");
  std::string hidden = "8";
  std::string activation = "relu";
  int epochs = 100;
  double lr = 0.01;
  train->add_option("--data", c.data_path, "training CSV")->required();
  train->add_option("--hidden", hidden, "hidden widths, e.g. 8,8");
  train->add_option("--activation", activation, "relu | hardtanh | sigmoid | tanh | identity");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--seed", c.seed, "weight initialisation seed");
  train->add_option("--keep-classes", c.keep_classes, "comma-separated classes to keep");
  train->add_option("--out", c.out, "network JSON")->required();

  // bounds
  auto* bounds = app.add_subcommand("bounds", "interval bounds of every layer on the ball");
  c.add_net(bounds);
  c.add_point(bounds);
  bounds->add_option("--eps", c.eps, "l-infinity radius");
  bounds->add_option("--out", c.out, "output file (default stdout)");

  // encode
  auto* encode = app.add_subcommand("encode", "dump the constraint system and optionally its QUBO");
  int target = -1;
  std::string qubo_out;
  bool keep_vacuous = false;
  c.add_net(encode);
  c.add_point(encode);
  c.add_encoding(encode);
  encode->add_option("--target", target, "competing class")->required();
  encode->add_option("--bits", c.bits, "bits per continuous variable in the QUBO");
  encode->add_option("--slack-bits", c.slack_bits, "bits per slack in the QUBO");
  encode->add_option("--qubo", qubo_out, "write the QUBO coordinate list here");
  encode->add_flag("--keep-vacuous", keep_vacuous, "keep inequality rows that can never be violated");
  encode->add_option("--out", c.out, "system JSON");

  // solve-qubo
  auto* solveq = app.add_subcommand("solve-qubo", "minimise a QUBO file");
  std::string qubo_in;
  bool exhaustive = false;
  solveq->add_option("--in", qubo_in, "QUBO coordinate list")->required();
  solveq->add_option("--seed", c.seed, "annealing seed");
  solveq->add_option("--restarts", c.restarts, "annealing restarts");
  solveq->add_option("--sweeps", c.sweeps, "annealing sweeps per restart");
  solveq->add_option("--budget-ms", c.budget_ms, "time budget");
  solveq->add_flag("--exhaustive", exhaustive, "enumerate all states instead of annealing");
  solveq->add_option("--out", c.out, "output file (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "verify one sample or a whole dataset at one radius");
  std::string trail_out;
  int partition_at = 0;
  int spin_budget = 0;
  c.add_net(verify);
  c.add_point(verify);
  c.add_encoding(verify);
  c.add_solver(verify);
  verify->add_option("--partition-at", partition_at, "split after this layer");
  verify->add_option("--spin-budget", spin_budget, "choose the split that fits this many spins");
  verify->add_option("--trail", trail_out, "Benders certificate trail per target (single sample)");
  verify->add_option("--keep-classes", c.keep_classes, "comma-separated classes to keep");
  verify->add_option("--out", c.out, "output file (default stdout)");

  // transfer
  auto* transfer = app.add_subcommand("transfer", "certify an original network through its pruned version");
  std::string mask_path;
  c.add_net(transfer);
  transfer->add_option("--mask", mask_path, "prune mask JSON")->required();
  transfer->add_option("--data", c.data_path, "dataset CSV")->required();
  transfer->add_option("--keep-classes", c.keep_classes, "comma-separated classes to keep");
  c.add_encoding(transfer);
  c.add_solver(transfer);
  transfer->add_option("--out", c.out, "output file (default stdout)");

  // campaign
  auto* campaign = app.add_subcommand("campaign", "sweep eps over a dataset");
  std::string eps_grid = "0.05,0.1,0.2";
  int limit = 0;
  int threads = 1;
  c.add_net(campaign);
  campaign->add_option("--data", c.data_path, "dataset CSV")->required();
  campaign->add_option("--keep-classes", c.keep_classes, "comma-separated classes to keep");
  campaign->add_option("--eps-grid", eps_grid, "comma-separated radii");
  campaign->add_option("--limit", limit, "use only the first N samples");
  campaign->add_option("--threads", threads, "worker threads");
  campaign->add_option("--partition-at", partition_at, "split after this layer");
  campaign->add_option("--spin-budget", spin_budget, "choose the split that fits this many spins");
  campaign->add_option("--model", c.model, "1 = exact piecewise-linear, 2 = step bounds")->check(CLI::IsMember({1, 2}));
  campaign->add_option("--segments", c.segments, "segments per neuron for model 2");
  campaign->add_flag("--one-sided", c.one_sided, "model 2: emit only the bound family the margin needs");
  c.add_solver(campaign);
  campaign->add_option("--out", c.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      Dataset d;
      if (kind == "two-moons") {
        d = make_two_moons(n, c.seed, noise);
      } else {
        if (csv_in.empty()) throw Error("--kind csv needs --in");
        d = load_csv(csv_in);
      }
      if (!c.keep_classes.empty()) d = filter_classes(d, parse_int_list(c.keep_classes));
      emit(dataset_to_csv(d), c.out);
    } else if (*train) {
      TrainConfig cfg;
      cfg.hidden = parse_int_list(hidden);
      cfg.activation = parse_activation(activation);
      cfg.epochs = epochs;
      cfg.lr = lr;
      cfg.seed = c.seed;
      const TrainResult r = train_fixture(c.dataset(), cfg);
      save_network(r.net, c.out);
      std::cout << json{{"accuracy", r.accuracy}, {"loss", r.loss}}.dump() << "\n";
    } else if (*bounds) {
      const Network net = load_network(c.net_path);
      const auto [x0, y] = c.point(net);
      const IntervalBounds b = propagate(net, x0, c.eps);
      json layers = json::array();
      for (int l = 1; l <= net.num_layers(); ++l) {
        layers.push_back({{"layer", l}, {"pre", box_json(b.z_lo[l], b.z_hi[l])}, {"post", box_json(b.a_lo[l], b.a_hi[l])}});
      }
      json doc{{"input", box_json(b.input.lo, b.input.hi)}, {"layers", layers}, {"H", activation_sup_bounds(b)}};
      json margins = json::object();
      for (int t = 0; t < net.output_dim(); ++t) {
        if (t != y) margins[std::to_string(t)] = ibp_pair_margin_lower(b, y, t);
      }
      doc["label"] = y;
      doc["pair_margin_lower"] = margins;
      emit(doc.dump(2), c.out);
    } else if (*encode) {
      const Network net = load_network(c.net_path);
      const auto [x0, y] = c.point(net);
      const MixedConstraintSystem sys = build_pair_system(net, {Box::ball(x0, c.eps), y, target}, c.encode());
      if (!qubo_out.empty()) {
        const BitEncoding enc = make_encoding(sys, c.bits, c.slack_bits, {.drop_vacuous_rows = !keep_vacuous});
        const QuboInstance inst = assemble(sys, enc, choose_rho(sys, enc));
        std::ofstream f(qubo_out);
        if (!f) throw Error("cannot write '" + qubo_out + "'");
        write_qubo(inst, f);
        std::cerr << "qubo dimension " << inst.dim() << ", rho " << inst.rho << "\n";
      }
      emit(system_to_json(sys), c.out);
    } else if (*solveq) {
      std::ifstream f(qubo_in);
      if (!f) throw Error("cannot open '" + qubo_in + "'");
      const QuboModel m = read_qubo(f);
      AnnealResult r;
      if (exhaustive) {
        r = solve_exhaustive(m);
      } else {
        AnnealConfig cfg;
        cfg.seed = c.seed;
        cfg.restarts = c.restarts;
        cfg.sweeps = c.sweeps;
        cfg.budget_ms = c.budget_ms;
        r = solve_sa(m, cfg);
      }
      std::vector<int> bits(r.bits.begin(), r.bits.end());
      emit(json{{"dimension", m.dim()},
                {"energy", r.energy},
                {"bits", bits},
                {"budget_exhausted", r.budget_exhausted},
                {"sweeps", r.sweeps_done},
                {"restart_best", r.history}}
               .dump(2),
           c.out);
    } else if (*verify) {
      const Network net = load_network(c.net_path);
      VerifyOptions v = c.verify_options();
      v.partition_at = partition_at;
      v.spin_budget = spin_budget;
      if (!c.data_path.empty() && c.index < 0 && c.x_text.empty()) {
        const CampaignReport r = run_campaign(net, c.dataset(), {c.eps}, v);
        emit(campaign_to_json(r).dump(2), c.out);
      } else {
        const auto [x0, y] = c.point(net);
        const SampleReport s = verify_sample(net, x0, y, c.eps, v, std::max(0, c.index));
        emit(sample_to_json(s).dump(2), c.out);
        if (!trail_out.empty()) {
          json trails = json::array();
          for (int t = 0; t < net.output_dim(); ++t) {
            if (t == y) continue;
            const MixedConstraintSystem sys = build_pair_system(net, {Box::ball(x0, c.eps), y, t}, c.encode());
            BendersOptions bo = v.solver.benders;
            bo.budget_ms = c.budget_ms;
            trails.push_back({{"target", t}, {"trail", json::parse(trail_to_json(run_benders(sys, bo)))}});
          }
          emit(trails.dump(2), trail_out);
        }
      }
    } else if (*transfer) {
      const Network net = load_network(c.net_path);
      const PrunedNetwork pn = apply_mask(net, load_mask(mask_path));
      const Dataset d = c.dataset();
      if (d.num_features() != net.input_dim()) throw Error("dataset features do not match the network input");
      std::vector<TransferSample> samples;
      json per = json::array();
      const SolverSettings s = c.settings();
      for (int i = 0; i < d.size(); ++i) {
        const TransferCertificate cert = certify_transfer(net, pn, d.x[i], d.y[i], c.eps, c.encode(), s);
        samples.push_back({cert.L_g, cert.U_g, cert.tau});
        per.push_back({{"index", i},
                       {"tau", cert.tau},
                       {"L_g", cert.L_g},
                       {"U_g", cert.U_g},
                       {"L_f", cert.bounds.lower},
                       {"U_f", cert.bounds.upper},
                       {"verdict", transfer_verdict_name(cert.bounds.verdict)},
                       {"complete", cert.complete}});
      }
      const DatasetBounds db = dataset_bounds(samples);
      emit(json{{"eps", c.eps},
                {"samples", per},
                {"ca_lower", db.ca_lower},
                {"ca_upper", db.ca_upper},
                {"certified_robust", db.certified_robust},
                {"certified_nonrobust", db.certified_nonrobust}}
               .dump(2),
           c.out);
    } else if (*campaign) {
      const Network net = load_network(c.net_path);
      Dataset d = c.dataset();
      if (limit > 0 && limit < d.size()) {
        d.x.resize(limit);
        d.y.resize(limit);
      }
      VerifyOptions v = c.verify_options();
      v.partition_at = partition_at;
      v.spin_budget = spin_budget;
      v.threads = threads;
      emit(campaign_to_json(run_campaign(net, d, parse_list(eps_grid), v)).dump(2), c.out);
    }
  } catch (const InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
