#include <doctest.h>

#include <cmath>

#include "certiq/encoding.hpp"
#include "certiq/error.hpp"
#include "certiq/refine.hpp"
#include "certiq/solve.hpp"
#include "oracles.hpp"

using namespace certiq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// 1-2-2 net whose hidden neurons straddle 0 on [-1, 1].
Network split_net(Activation act) {
  Matrix w1(2, 1);
  w1 << 1, -1;
  Matrix w2(2, 2);
  w2 << 1, 1, 1, -1;
  return Network(1, act, {{w1, Vector::Zero(2), act}, {w2, Vector::Zero(2), Activation::kIdentity}});
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("piecewise-linear segment tables") {
  SegmentTable t = build_segment_table_pwl(Activation::kRelu, -2.0, 2.0);
  REQUIRE(t.num_segments() == 2);
  CHECK(t.breakpoints == std::vector<double>{-2.0, 0.0, 2.0});
  CHECK(t.slope == std::vector<double>{0.0, 1.0});
  CHECK(t.intercept == std::vector<double>{0.0, 0.0});

  t = build_segment_table_pwl(Activation::kHardTanh, -3.0, 3.0);
  REQUIRE(t.num_segments() == 3);
  CHECK(t.slope == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(t.intercept == std::vector<double>{-1.0, 0.0, 1.0});

  t = build_segment_table_pwl(Activation::kRelu, 0.5, 2.0);
  REQUIRE(t.num_segments() == 1);
  CHECK(t.slope[0] == 1.0);

  CHECK_THROWS_AS(build_segment_table_pwl(Activation::kRelu, 1.0, 1.0), Error);
  CHECK_THROWS_AS(build_segment_table_pwl(Activation::kSigmoid, -1.0, 1.0), Error);
  CHECK_THROWS_AS(SegmentTable::from_breakpoints(Activation::kRelu, {-1.0, 1.0}), Error);
}

TEST_CASE("segment tables are continuous and exact at breakpoints") {
  for (Activation act : {Activation::kRelu, Activation::kHardTanh}) {
    const SegmentTable t = build_segment_table_pwl(act, -2.5, 1.7);
    for (int i = 0; i < t.num_segments(); ++i) {
      for (double z : {t.breakpoints[i], t.breakpoints[i + 1]}) {
        CHECK(t.slope[i] * z + t.intercept[i] == doctest::Approx(apply_activation(act, z)));
      }
    }
  }
}

TEST_CASE("model 1 dimensions with two segments per neuron") {
  const Network net = split_net(Activation::kRelu);
  const PairQuery q{Box::ball(Vector::Zero(1), 1.0), 0, 1};
  const IntervalBounds b = propagate(net, q.input);
  PwlTables tables = default_pwl_tables(net, b);
  // split each logit at its midpoint so every neuron carries two segments
  for (int j = 0; j < 2; ++j) {
    const double lo = b.z_lo[2][j], hi = b.z_hi[2][j];
    tables[1][j] = SegmentTable::from_breakpoints(Activation::kIdentity, {lo, 0.5 * (lo + hi), hi});
  }
  const MixedConstraintSystem sys = build_model1(net, q, tables, b);
  // n0 + sum_l (2 n_l + 2 n_l), selectors sum_l 2 n_l
  CHECK(sys.num_continuous() == 17);
  CHECK(sys.num_binary() == 8);
  CHECK(sys.num_eq() == 12);    // 4 pre + 4 act + 4 one-hot
  CHECK(sys.num_ineq() == 42);  // 2 input + 8 segment + 32 big-M
  CHECK(sys.onehot_groups.size() == 4);
}

TEST_CASE("model 1 at eps zero gives the logit difference") {
  Rng rng(41);
  const Network net = fixture::random_net(rng, 2, {3}, 3, Activation::kRelu);
  const Vector x0 = fixture::random_point(rng, 2);
  const MixedConstraintSystem sys = build_model1(net, {Box::ball(x0, 0.0), 0, 2});
  const SystemOptimum opt = solve_enumerate(sys);
  const Vector f = forward_eval(net, x0);
  REQUIRE(opt.complete);
  CHECK(opt.lower_bound == doctest::Approx(f[0] - f[2]).epsilon(1e-12));
}

TEST_CASE("model 1 optimum matches grid search and replays exactly") {
  Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = fixture::random_net(rng, 1, {1}, 2, Activation::kRelu);
    const Vector x0 = fixture::random_point(rng, 1);
    const PairQuery q{Box::ball(x0, 0.25), 0, 1};
    const MixedConstraintSystem sys = build_model1(net, q);
    const SystemOptimum opt = solve_enumerate(sys);
    REQUIRE(opt.feasible);
    CHECK(opt.lower_bound == doctest::Approx(opt.upper_bound));
    const double grid = oracle::grid_pair_margin(net, q.input, 0, 1, 1e-4);
    CHECK(opt.lower_bound <= grid + 1e-9);
    CHECK(grid - opt.lower_bound <= 1e-3);
    const Vector x = sys.input_point(opt.y);
    CHECK(std::abs(pair_margin(forward_eval(net, x), 0, 1) - opt.upper_bound) <= 1e-9);
  }
}

TEST_CASE("interval pruning never changes the model 1 optimum") {
  Rng rng(47);
  for (int trial = 0; trial < 6; ++trial) {
    const Network net = fixture::random_net(rng, 2, {3}, 2, Activation::kHardTanh, 1.5);
    const PairQuery q{Box::ball(fixture::random_point(rng, 2), 0.3), 1, 0};
    const IntervalBounds b = propagate(net, q.input);
    // wide tables covering [-4, 4] so pruning has something to remove
    PwlTables wide = default_pwl_tables(net, b);
    for (int j = 0; j < 3; ++j) {
      if (wide[0][j].empty()) continue;
      const double lo = std::min(-4.0, b.z_lo[1][j] - 1.0), hi = std::max(4.0, b.z_hi[1][j] + 1.0);
      wide[0][j] = SegmentTable::from_breakpoints(Activation::kHardTanh, {lo, -1.0, 1.0, hi});
    }
    const double pruned = solve_enumerate(build_model1(net, q, wide, b, {.prune_segments = true})).lower_bound;
    const MixedConstraintSystem full_sys = build_model1(net, q, wide, b, {.prune_segments = false});
    const double full = solve_enumerate(full_sys).lower_bound;
    CHECK(pruned == doctest::Approx(full).epsilon(1e-9));
  }
}

TEST_CASE("model 1 rejects bad queries") {
  const Network net = split_net(Activation::kRelu);
  CHECK_THROWS_AS(build_model1(net, {Box::ball(Vector::Zero(1), 1.0), 1, 1}), Error);
  CHECK_THROWS_AS(build_model1(split_net(Activation::kSigmoid), {Box::ball(Vector::Zero(1), 1.0), 0, 1}), Error);
  CHECK_THROWS_AS(build_pair_system(net, {Box::ball(Vector::Zero(1), 1.0), 0, 1}, {.model = 3}), Error);
}

TEST_CASE("feasibility residuals") {
  // one neuron: z = x, a = relu(z), x in [-1, 1]
  const Network net(1, Activation::kRelu,
                    {{Matrix::Ones(1, 1), Vector::Zero(1), Activation::kRelu},
                     {Matrix::Ones(2, 1), Vector::Zero(2), Activation::kIdentity}});
  const MixedConstraintSystem sys = build_model1(net, {Box::ball(Vector::Zero(1), 1.0), 0, 1});
  const SystemOptimum opt = solve_enumerate(sys);
  REQUIRE(opt.feasible);
  CHECK(eval_feasible(sys, opt.y, opt.beta).max_violation <= 1e-9);

  Vector two = opt.beta;
  two.setZero();
  two[sys.onehot_groups[0][0]] = 1.0;
  two[sys.onehot_groups[0][1]] = 1.0;
  CHECK(eval_feasible(sys, opt.y, two).max_violation >= 1.0);

  Vector y = opt.y;
  const int xc = sys.layout.input_columns[0];
  y[xc] = sys.layout.hi[xc] + 0.125;
  CHECK(eval_feasible(sys, y, opt.beta).max_violation >= 0.125 - 1e-12);
}

TEST_CASE("step-bound tables") {
  StepBoundTable t = build_step_table(Activation::kSigmoid, 0.0, 1.0, 1);
  CHECK(t.lower[0] == doctest::Approx(0.5));
  CHECK(t.upper[0] == doctest::Approx(sigmoid(1.0)));

  t = build_step_table(Activation::kIdentity, 0.0, 2.0, 2);
  CHECK(t.lower == std::vector<double>{0.0, 1.0});
  CHECK(t.upper == std::vector<double>{1.0, 2.0});

  t = build_step_table(Activation::kTanh, -1.0, 1.0, 2);
  CHECK(t.lower[0] == doctest::Approx(std::tanh(-1.0)));
  CHECK(t.lower[1] == doctest::Approx(0.0));
  CHECK(t.upper[0] == doctest::Approx(0.0));
  CHECK(t.upper[1] == doctest::Approx(std::tanh(1.0)));

  CHECK_THROWS_AS(build_step_table(Activation::kTanh, 1.0, -1.0, 2), Error);
  CHECK_THROWS_AS(build_step_table(Activation::kTanh, -1.0, 1.0, 0), Error);

  for (Activation act : {Activation::kSigmoid, Activation::kTanh, Activation::kRelu, Activation::kHardTanh}) {
    const StepBoundTable s = build_step_table(act, -2.3, 1.9, 5);
    bool enclosed = true;
    for (int i = 0; i < s.num_segments(); ++i) {
      for (int k = 0; k <= 1000; ++k) {
        const double z = s.breakpoints[i] + (s.breakpoints[i + 1] - s.breakpoints[i]) * k / 1000.0;
        const double v = apply_activation(act, z);
        enclosed = enclosed && s.lower[i] <= v + 1e-15 && v <= s.upper[i] + 1e-15;
      }
    }
    CHECK(enclosed);
  }
}

TEST_CASE("model 2 dimensions") {
  const Network net = split_net(Activation::kSigmoid);
  const PairQuery q{Box::ball(Vector::Zero(1), 1.0), 0, 1};
  const MixedConstraintSystem sys = build_model2(net, q, 2);
  // n0 + 4 sum n_l; selectors 2 n per hidden neuron, logits exact
  CHECK(sys.num_continuous() == 17);
  CHECK(sys.num_binary() == 8);
  CHECK(sys.num_eq() == 20);    // 8 pre + 8 act + 4 one-hot
  CHECK(sys.num_ineq() == 10);  // 2 input + 8 segment
  const MixedConstraintSystem one = build_model2(net, q, 2, {.one_sided = true});
  CHECK(one.num_continuous() < sys.num_continuous());
  CHECK(solve_enumerate(one).lower_bound == doctest::Approx(solve_enumerate(sys).lower_bound).epsilon(1e-9));
}

TEST_CASE("model 2 approaches the margin at eps zero") {
  Rng rng(53);
  const Network net = fixture::random_net(rng, 2, {2}, 2, Activation::kSigmoid);
  const Vector x0 = fixture::random_point(rng, 2);
  const Vector f = forward_eval(net, x0);
  const MixedConstraintSystem sys = build_model2(net, {Box::ball(x0, 0.0), 0, 1}, 16);
  // every neuron is folded at a point ball
  CHECK(sys.num_binary() == 0);
  CHECK(solve_enumerate(sys).lower_bound == doctest::Approx(f[0] - f[1]).epsilon(1e-12));

  const PairQuery tiny{Box::ball(x0, 1e-3), 0, 1};
  const SystemOptimum opt = solve_enumerate(build_model2(net, tiny, 8));
  CHECK(opt.lower_bound <= oracle::grid_pair_margin(net, tiny.input, 0, 1, 1e-4) + 1e-12);
  CHECK(f[0] - f[1] - opt.lower_bound <= 0.02);
}

TEST_CASE("model 2 bound is sound on a monotone chain") {
  Rng rng(59);
  for (Activation act : {Activation::kSigmoid, Activation::kTanh}) {
    const Network net = fixture::random_net(rng, 1, {1}, 2, act, 2.0);
    const PairQuery q{Box::ball(fixture::random_point(rng, 1), 0.5), 1, 0};
    const double truth = oracle::grid_pair_margin(net, q.input, 1, 0, 1e-4);
    for (int n : {1, 2, 4, 8}) {
      const SystemOptimum opt = solve_enumerate(build_model2(net, q, n));
      CHECK(opt.lower_bound <= truth + 1e-12);
    }
  }
}

TEST_CASE("refinement on identity halves the step gap") {
  Rng rng(61);
  const Network net = fixture::random_net(rng, 1, {1}, 2, Activation::kIdentity);
  const RefineResult r = refine_until(net, {Box::ball(Vector::Zero(1), 1.0), 0, 1}, 1e-12, 1, 8);
  REQUIRE(r.trajectory.size() == 4);
  const IntervalBounds b = propagate(net, Vector::Zero(1), 1.0);
  const double width = b.z_hi[1][0] - b.z_lo[1][0];
  for (const RefineStep& s : r.trajectory) CHECK(s.step_gap == doctest::Approx(width / s.segments));
}

TEST_CASE("refinement on sigmoid tightens strictly") {
  Rng rng(67);
  const Network net = fixture::random_net(rng, 1, {1}, 2, Activation::kSigmoid, 2.0);
  const PairQuery q{Box::ball(vec({0.1}), 0.5), 0, 1};
  const RefineResult r = refine_until(net, q, 1e-12, 2, 16);
  REQUIRE(r.trajectory.size() == 4);
  CHECK_FALSE(r.complete);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory[i].gap < r.trajectory[i - 1].gap);
    CHECK(r.trajectory[i].lower >= r.trajectory[i - 1].lower - 1e-12);
  }
  CHECK(r.trajectory.front().gap >= 4.0 * r.trajectory.back().gap);

  const RefineResult easy = refine_until(net, q, 1.0, 2, 16);
  CHECK(easy.complete);
  CHECK(easy.gap <= 1.0);
}
