#include <doctest.h>

#include <cmath>

#include "certiq/error.hpp"
#include "certiq/interval.hpp"
#include "oracles.hpp"

using namespace certiq;

TEST_CASE("sign-split sum through one identity layer") {
  Matrix w(1, 2);
  w << 1, -1;
  const Network net(2, Activation::kIdentity, {{w, Vector::Zero(1), Activation::kIdentity}});
  const IntervalBounds b = propagate(net, Vector::Zero(2), 1.0);
  CHECK(b.z_lo[1][0] == doctest::Approx(-2.0));
  CHECK(b.z_hi[1][0] == doctest::Approx(2.0));
}

TEST_CASE("relu interval") {
  const Network net(1, Activation::kRelu,
                    {{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -1.0), Activation::kRelu},
                     {Matrix::Ones(1, 1), Vector::Zero(1), Activation::kIdentity}});
  const IntervalBounds b = propagate(net, Vector::Ones(1), 0.5);
  CHECK(b.z_lo[1][0] == doctest::Approx(0.0));
  CHECK(b.z_hi[1][0] == doctest::Approx(2.0));
  CHECK(b.a_lo[1][0] == doctest::Approx(0.0));
  CHECK(b.a_hi[1][0] == doctest::Approx(2.0));
}

TEST_CASE("monte carlo containment for every activation") {
  Rng rng(17);
  for (Activation act : {Activation::kRelu, Activation::kHardTanh, Activation::kSigmoid, Activation::kTanh,
                         Activation::kIdentity}) {
    const Network net = fixture::random_net(rng, 2, {4, 3}, 2, act, 1.5);
    const Vector x0 = fixture::random_point(rng, 2);
    const IntervalBounds b = propagate(net, x0, 0.3);
    const std::vector<double> H = activation_sup_bounds(b);
    bool inside = true;
    for (const Vector& x : oracle::sample_box(b.input, 10000, rng)) {
      const Trace t = forward_trace(net, x);
      for (int l = 1; l <= net.num_layers(); ++l) {
        for (int j = 0; j < t.pre[l].size(); ++j) {
          inside = inside && t.pre[l][j] >= b.z_lo[l][j] - 1e-12 && t.pre[l][j] <= b.z_hi[l][j] + 1e-12;
          inside = inside && t.post[l][j] >= b.a_lo[l][j] - 1e-12 && t.post[l][j] <= b.a_hi[l][j] + 1e-12;
        }
        inside = inside && t.post[l].cwiseAbs().maxCoeff() <= H[l] + 1e-12;
      }
    }
    CHECK(inside);
  }
}

TEST_CASE("intervals nest in eps and collapse at zero") {
  Rng rng(23);
  const Network net = fixture::random_net(rng, 3, {5}, 3, Activation::kSigmoid);
  const Vector x0 = fixture::random_point(rng, 3);
  const IntervalBounds small = propagate(net, x0, 0.05);
  const IntervalBounds large = propagate(net, x0, 0.2);
  for (int l = 1; l <= net.num_layers(); ++l) {
    CHECK((large.z_lo[l].array() <= small.z_lo[l].array()).all());
    CHECK((large.z_hi[l].array() >= small.z_hi[l].array()).all());
  }
  const IntervalBounds point = propagate(net, x0, 0.0);
  const Trace t = forward_trace(net, x0);
  for (int l = 1; l <= net.num_layers(); ++l) {
    CHECK((point.z_lo[l] - t.pre[l]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((point.z_hi[l] - t.pre[l]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("segment feasibility") {
  const std::vector<double> bp{-1.0, 0.0, 1.0};
  auto f = feasible_segments(0.3, 0.9, bp);
  CHECK_FALSE(f[0]);
  CHECK(f[1]);
  f = feasible_segments(-0.5, 0.5, bp);
  CHECK(f[0]);
  CHECK(f[1]);
  CHECK_THROWS_AS(feasible_segments(-2.0, 0.5, bp), Error);

  Rng rng(29);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> grid{-3.0};
    for (int i = 0; i < 6; ++i) grid.push_back(grid.back() + rng.uniform(0.1, 1.0));
    double lo = rng.uniform(grid.front(), grid.back());
    double hi = rng.uniform(grid.front(), grid.back());
    if (lo > hi) std::swap(lo, hi);
    const auto mask = feasible_segments(lo, hi, grid);
    for (int i = 0; i < 6; ++i) CHECK(mask[i] == !(hi < grid[i] || lo > grid[i + 1]));
  }
}

TEST_CASE("activation sup bounds") {
  const Network net(2, Activation::kRelu,
                    {{Matrix::Identity(2, 2), Vector::Zero(2), Activation::kRelu},
                     {Matrix::Ones(1, 2), Vector::Zero(1), Activation::kIdentity}});
  const IntervalBounds b = propagate(net, Vector::Zero(2), 1.0);
  const auto H = activation_sup_bounds(b);
  CHECK(H[0] == doctest::Approx(1.0));
  CHECK(H[1] == doctest::Approx(1.0));

  const Network r(1, Activation::kRelu,
                  {{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -1.0), Activation::kRelu},
                   {Matrix::Ones(1, 1), Vector::Zero(1), Activation::kIdentity}});
  CHECK(activation_sup_bounds(propagate(r, Vector::Ones(1), 0.5))[1] == doctest::Approx(2.0));
}

TEST_CASE("interval margin bound is sound") {
  Rng rng(31);
  const Network net = fixture::random_net(rng, 2, {3}, 3, Activation::kRelu);
  const Vector x0 = fixture::random_point(rng, 2);
  const IntervalBounds b = propagate(net, x0, 0.2);
  const double lower = ibp_pair_margin_lower(b, 0, 2);
  CHECK(oracle::grid_pair_margin(net, b.input, 0, 2, 0.01) >= lower - 1e-12);
}
