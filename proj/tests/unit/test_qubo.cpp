#include <doctest.h>

#include <cmath>
#include <sstream>

#include "certiq/anneal.hpp"
#include "certiq/encoding.hpp"
#include "certiq/error.hpp"
#include "certiq/qubo.hpp"
#include "certiq/solve.hpp"
#include "oracles.hpp"

using namespace certiq;

namespace {

MixedConstraintSystem single_column(double lo, double hi) {
  SystemBuilder sb;
  sb.layout().add_column({}, lo, hi);
  sb.set_objective({{0, 1.0}}, 0.0);
  return sb.finish();
}

Bits random_bits(Rng& rng, int n) {
  Bits b(n);
  for (auto& v : b) v = rng.coin() ? 1 : 0;
  return b;
}

MixedConstraintSystem model1_fixture(std::uint64_t seed) {
  Rng rng(seed);
  const Network net = fixture::random_net(rng, 1, {2}, 2, Activation::kRelu);
  return build_model1(net, {Box::ball(fixture::random_point(rng, 1), 0.4), 0, 1});
}

}  // namespace

TEST_CASE("bit weights") {
  BitEncoding e = make_encoding(single_column(0.0, 3.0), 2, 2);
  CHECK(e.y_weights[0] == std::vector<double>{1.0, 2.0});
  QuboInstance inst = assemble(single_column(0.0, 3.0), e, 1.0);
  CHECK(decode(inst, {1, 1}).y[0] == doctest::Approx(3.0));

  e = make_encoding(single_column(-1.0, 1.0), 3, 2);
  REQUIRE(e.y_weights[0].size() == 3);
  CHECK(e.y_weights[0][0] == doctest::Approx(2.0 / 7));
  CHECK(e.y_weights[0][1] == doctest::Approx(4.0 / 7));
  CHECK(e.y_weights[0][2] == doctest::Approx(8.0 / 7));
  CHECK(e.resolution() == doctest::Approx(2.0 / 7));

  CHECK(make_encoding(single_column(1.0, 1.0), 4, 2).y_bits() == 0);
  CHECK_THROWS_AS(make_encoding(single_column(0.0, 1.0), 0, 2), Error);
}

TEST_CASE("slack range by interval evaluation") {
  SystemBuilder sb;
  sb.layout().add_column({}, -1.0, 1.0);
  sb.add_inequality(RowKind::kOther, {{0, 1.0}}, 1.0, {});
  sb.set_objective({{0, 1.0}}, 0.0);
  const MixedConstraintSystem sys = sb.finish();
  const BitEncoding e = make_encoding(sys, 2, 3);
  CHECK(e.slack_hi[0] == doctest::Approx(2.0));
  // the row can never be violated, so the pipeline setting drops it
  CHECK(make_encoding(sys, 2, 3, {.drop_vacuous_rows = true}).slack_rows.empty());

  SystemBuilder bad;
  bad.layout().add_column({}, 0.0, 1.0);
  bad.add_inequality(RowKind::kOther, {{0, 1.0}}, -2.0, {});
  CHECK_THROWS_AS(make_encoding(bad.finish(), 2, 2), Error);
}

TEST_CASE("single equality penalty by hand") {
  SystemBuilder sb;
  sb.layout().add_column({}, 0.0, 3.0);
  sb.add_equality(RowKind::kOther, {{0, 1.0}}, 1.0, {});
  sb.set_objective({{0, 1.0}}, 0.0);
  const MixedConstraintSystem sys = sb.finish();
  const QuboInstance inst = assemble(sys, make_encoding(sys, 2, 2), 2.0);
  CHECK(energy(inst.model, {1, 0}) == doctest::Approx(1.0));      // y = 1, feasible
  CHECK(energy(inst.model, {1, 1}) == doctest::Approx(3.0 + 4.0));  // y = 3 pays rho/2 * 4
  CHECK_THROWS_AS(assemble(sys, make_encoding(sys, 2, 2), 0.0), Error);
}

TEST_CASE("no inequality rows means no slack blocks") {
  SystemBuilder sb;
  sb.layout().add_column({}, 0.0, 1.0);
  sb.layout().add_column({}, 0.0, 1.0);
  const int a = sb.layout().add_selector({});
  const int b = sb.layout().add_selector({});
  sb.add_equality(RowKind::kOther, {{0, 1.0}, {1, -1.0}}, 0.0, {{a, 0.5}});
  sb.add_onehot({a, b});
  sb.set_objective({{0, 1.0}}, 0.0);
  const MixedConstraintSystem sys = sb.finish();
  const BitEncoding e = make_encoding(sys, 3, 2);
  CHECK(e.slack_bits() == 0);
  CHECK(qubo_dimension(sys, e) == 2 * 3 + 2);
}

TEST_CASE("energy identity against the independent oracle") {
  Rng rng(83);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MixedConstraintSystem sys = model1_fixture(seed);
    const BitEncoding e = make_encoding(sys, 3, 3);
    const double rho = choose_rho(sys, e);
    const QuboInstance inst = assemble(sys, e, rho);
    CHECK(inst.dim() == e.y_bits() + e.slack_bits() + sys.num_binary());
    CHECK((inst.model.Q - inst.model.Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int t = 0; t < 200; ++t) {
      const Bits bits = random_bits(rng, inst.dim());
      const double ref = oracle::qubo_energy(sys, e, rho, bits);
      CHECK(std::abs(energy(inst.model, bits) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("closed-form blocks match the generic product") {
  const MixedConstraintSystem sys = model1_fixture(9);
  const BitEncoding e = make_encoding(sys, 2, 2);
  const double rho = 3.5;
  const QuboInstance inst = assemble(sys, e, rho);
  const Matrix M = penalty_matrix(sys, e);
  const Vector r = penalty_rhs(sys, e);
  const Matrix Q = 0.5 * rho * M.transpose() * M;
  Vector lin = -rho * M.transpose() * r;
  int pos = 0;
  for (std::size_t i = 0; i < e.y_weights.size(); ++i) {
    for (double w : e.y_weights[i]) lin[pos++] += w * sys.objective[i];
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  CHECK((inst.model.Q - Q).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK((inst.model.q - lin).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("decode") {
  const MixedConstraintSystem sys = model1_fixture(13);
  const BitEncoding e = make_encoding(sys, 3, 3);
  const QuboInstance inst = assemble(sys, e, 1.0);
  const Decoded zero = decode(inst, Bits(inst.dim(), 0));
  CHECK((zero.y - sys.layout.lo).norm() == 0.0);
  CHECK(zero.slack.isZero());
  // all-zero selectors violate every one-hot row by 1
  CHECK(zero.residual >= 1.0);
  CHECK_THROWS_AS(decode(inst, Bits(3, 0)), Error);

  // round trip of an exact optimum
  const SystemOptimum opt = solve_enumerate(sys);
  REQUIRE(opt.feasible);
  const Vector slack = sys.d0 + sys.D * opt.beta - sys.C * opt.y;
  Vector enc_slack(e.slack_rows.size());
  for (std::size_t r = 0; r < e.slack_rows.size(); ++r) enc_slack[r] = slack[e.slack_rows[r]];
  const Decoded d = decode(inst, encode_point(inst, opt.y, opt.beta, enc_slack));
  // each value moves by at most half of its own grid step
  double bound = 0.0;
  for (int i = 0; i < sys.num_eq(); ++i) {
    double b = 0.0;
    for (int v = 0; v < sys.num_continuous(); ++v) {
      if (!e.y_weights[v].empty()) b += std::abs(sys.A(i, v)) * 0.5 * e.y_weights[v].front();
    }
    bound = std::max(bound, b);
  }
  for (std::size_t r = 0; r < e.slack_rows.size(); ++r) {
    double b = e.slack_weights[r].empty() ? 0.0 : 0.5 * e.slack_weights[r].front();
    for (int v = 0; v < sys.num_continuous(); ++v) {
      if (!e.y_weights[v].empty()) b += std::abs(sys.C(e.slack_rows[r], v)) * 0.5 * e.y_weights[v].front();
    }
    bound = std::max(bound, b);
  }
  CHECK(d.residual <= bound + 1e-9);
  CHECK(d.beta == opt.beta);
}

TEST_CASE("penalty weight choice") {
  SystemBuilder sb;
  sb.layout().add_column({}, 0.0, 4.0);
  sb.add_inequality(RowKind::kOther, {{0, 1.0}}, 0.75, {});
  sb.set_objective({{0, 1.0}}, 0.0);
  const MixedConstraintSystem sys = sb.finish();
  const BitEncoding e = make_encoding(sys, 1, 2);
  CHECK(e.resolution() == doctest::Approx(0.25));
  CHECK(choose_rho(sys, e) >= 128.0);

  SystemBuilder flat;
  flat.layout().add_column({}, 0.0, 1.0);
  flat.set_objective({}, 0.0);
  const MixedConstraintSystem z = flat.finish();
  CHECK(choose_rho(z, make_encoding(z, 2, 2)) == 1.0);
}

TEST_CASE("chosen rho keeps tiny ground states penalty-feasible") {
  Rng rng(89);
  for (int t = 0; t < 10; ++t) {
    const MixedConstraintSystem sys = fixture::integer_system(rng, 2, 2, 2, t % 2 == 0);
    const SystemOptimum ref = solve_enumerate(sys);
    if (!ref.feasible) continue;
    const BitEncoding e = make_encoding(sys, 2, 2);
    const QuboInstance inst = assemble(sys, e, choose_rho(sys, e));
    const Decoded d = decode(inst, solve_exhaustive(inst.model).bits);
    CHECK(d.residual <= e.resolution());
  }
}

TEST_CASE("qubo file round trip") {
  const MixedConstraintSystem sys = model1_fixture(17);
  const BitEncoding e = make_encoding(sys, 2, 2);
  const QuboInstance inst = assemble(sys, e, choose_rho(sys, e));
  std::stringstream ss;
  write_qubo(inst, ss);
  const QuboModel back = read_qubo(ss);
  REQUIRE(back.dim() == inst.dim());
  Rng rng(97);
  for (int t = 0; t < 50; ++t) {
    const Bits b = random_bits(rng, inst.dim());
    CHECK(energy(back, b) == doctest::Approx(energy(inst.model, b)).epsilon(1e-12));
  }
  std::stringstream junk("# dimension 2\n0 x 1\n");
  CHECK_THROWS_AS(read_qubo(junk), Error);
}
