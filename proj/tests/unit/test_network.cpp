#include <doctest.h>

#include "certiq/error.hpp"
#include "certiq/network.hpp"
#include "oracles.hpp"

using namespace certiq;

namespace {

Network relu_chain() {
  Layer l1{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -1.0), Activation::kRelu};
  Layer l2{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::kIdentity};
  return Network(1, Activation::kRelu, {l1, l2});
}

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("forward pass on the relu chain") {
  const Network net = relu_chain();
  CHECK(forward_eval(net, vec({1.0}))[0] == doctest::Approx(1.0));
  CHECK(forward_eval(net, vec({0.0}))[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(forward_eval(net, vec({1.0, 2.0})), Error);
}

TEST_CASE("forward pass matches the loop oracle") {
  Rng rng(11);
  for (Activation act : {Activation::kRelu, Activation::kHardTanh, Activation::kSigmoid, Activation::kTanh}) {
    const Network net = fixture::random_net(rng, 2, {2}, 2, act);
    for (int t = 0; t < 20; ++t) {
      const Vector x = fixture::random_point(rng, 2, -2.0, 2.0);
      CHECK((forward_eval(net, x) - oracle::forward(net, x)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("trace agrees with eval") {
  Rng rng(3);
  const Network net = fixture::random_net(rng, 3, {4, 3}, 2, Activation::kTanh);
  const Vector x = fixture::random_point(rng, 3);
  const Trace t = forward_trace(net, x);
  CHECK(t.post.size() == 4);
  CHECK((t.post.back() - forward_eval(net, x)).norm() == doctest::Approx(0.0));
}

TEST_CASE("logit margin") {
  CHECK(logit_margin(vec({2, 5, 1}), 1) == doctest::Approx(3.0));
  CHECK(logit_margin(vec({2, 2}), 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(logit_margin(vec({1}), 0), Error);
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Vector a = fixture::random_point(rng, 5);
    for (int y = 0; y < 5; ++y) {
      double best = -1e300;
      for (int k = 0; k < 5; ++k) {
        if (k != y) best = std::max(best, a[k]);
      }
      CHECK(logit_margin(a, y) == doctest::Approx(a[y] - best));
      CHECK((logit_margin(a, y) > 0) == (a.maxCoeff() == a[y] && (a.array() == a[y]).count() == 1));
    }
  }
}

TEST_CASE("operator infinity norm") {
  Matrix m(2, 2);
  m << 1, -2, 3, 0;
  CHECK(op_norm_inf(m) == doctest::Approx(3.0));
  CHECK(op_norm_inf(Matrix::Zero(3, 2)) == 0.0);
  Rng rng(9);
  Matrix r(4, 4);
  for (int i = 0; i < 16; ++i) r.data()[i] = rng.uniform(-1, 1);
  double brute = 0.0;
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += std::abs(r(i, j));
    brute = std::max(brute, s);
  }
  CHECK(op_norm_inf(r) == doctest::Approx(brute));
}

TEST_CASE("pruning masks") {
  Layer l1{Matrix::Ones(1, 2), Vector::Zero(1), Activation::kIdentity};
  const Network net(2, Activation::kRelu, {l1});
  PruneMask mask{{Matrix(1, 2)}};
  mask.masks[0] << 1, 0;
  const PrunedNetwork pn = apply_mask(net, mask);
  CHECK(pn.pruned.layer(0).weights(0, 0) == 1.0);
  CHECK(pn.pruned.layer(0).weights(0, 1) == 0.0);
  CHECK(pn.residuals[0](0, 1) == 1.0);

  const PrunedNetwork same = apply_mask(net, PruneMask{{Matrix::Ones(1, 2)}});
  CHECK(same.residuals[0].isZero());

  Rng rng(21);
  const Network big = fixture::random_net(rng, 3, {5, 4}, 3, Activation::kRelu);
  const PrunedNetwork rp = apply_mask(big, fixture::random_mask(rng, big, 0.6));
  for (int l = 0; l < big.num_layers(); ++l) {
    CHECK((rp.pruned.layer(l).weights + rp.residuals[l] - big.layer(l).weights).isZero(0.0));
    CHECK(rp.pruned.layer(l).bias == big.layer(l).bias);
  }
  CHECK_THROWS_AS(apply_mask(big, PruneMask{{Matrix::Ones(1, 1)}}), Error);
}

TEST_CASE("network json round trip") {
  Rng rng(4);
  const Network net = fixture::random_net(rng, 2, {3}, 2, Activation::kSigmoid);
  const Network back = network_from_json(network_to_json(net));
  CHECK(back.hidden_activation() == Activation::kSigmoid);
  for (int l = 0; l < net.num_layers(); ++l) {
    CHECK(back.layer(l).weights == net.layer(l).weights);
    CHECK(back.layer(l).bias == net.layer(l).bias);
  }
  CHECK_THROWS_AS(network_from_json("{not json"), Error);
  CHECK_THROWS_AS(network_from_json(R"({"input_dim":1,"activation":"relu","layers":[{"rows":1,"cols":1,"weights":[1,2],"bias":[0]}]})"),
                  Error);
}

TEST_CASE("per-layer Lipschitz bound after normalisation") {
  Rng rng(8);
  for (Activation act : {Activation::kRelu, Activation::kHardTanh, Activation::kSigmoid}) {
    const Network net = fixture::random_net(rng, 3, {4}, 2, act);
    const Layer& l = net.layer(0);
    const double norm = op_norm_inf(l.weights);
    for (int t = 0; t < 100; ++t) {
      const Vector x = fixture::random_point(rng, 3);
      const Vector y = fixture::random_point(rng, 3);
      Vector hx = l.weights * x + l.bias, hy = l.weights * y + l.bias;
      for (int j = 0; j < hx.size(); ++j) {
        hx[j] = apply_activation(act, hx[j]);
        hy[j] = apply_activation(act, hy[j]);
      }
      CHECK((hx - hy).cwiseAbs().maxCoeff() / norm <= (x - y).cwiseAbs().maxCoeff() + 1e-9);
    }
  }
}

TEST_CASE("slicing keeps the suffix") {
  Rng rng(2);
  const Network net = fixture::random_net(rng, 2, {3, 3}, 2, Activation::kRelu);
  const Network tail = net.slice(1, 3);
  CHECK(tail.input_dim() == 3);
  const Trace t = forward_trace(net, fixture::random_point(rng, 2));
  CHECK((forward_eval(tail, t.post[1]) - t.post[3]).norm() == doctest::Approx(0.0));
}
