#include "certiq/train.hpp"

#include <cmath>
#include <string>

#include "certiq/error.hpp"
#include "certiq/random.hpp"

namespace certiq {

int predict(const Network& net, const Vector& x) {
  Eigen::Index k;
  forward_eval(net, x).maxCoeff(&k);
  return static_cast<int>(k);
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  int hits = 0;
  for (int i = 0; i < data.size(); ++i) hits += predict(net, data.x[i]) == data.y[i];
  return static_cast<double>(hits) / data.size();
}

namespace {

Vector log_softmax(const Vector& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

double activation_slope(Activation act, double z, double a) {
  switch (act) {
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kHardTanh: return (z > -1.0 && z < 1.0) ? 1.0 : 0.0;
    case Activation::kSigmoid: return a * (1.0 - a);
    case Activation::kTanh: return 1.0 - a * a;
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

struct Adam {
  Matrix m, v;
  void init(Eigen::Index r, Eigen::Index c) {
    m = Matrix::Zero(r, c);
    v = Matrix::Zero(r, c);
  }
  void step(Matrix& param, const Matrix& grad, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

double cross_entropy(const Network& net, const Dataset& data) {
  double loss = 0.0;
  for (int i = 0; i < data.size(); ++i) loss -= log_softmax(forward_eval(net, data.x[i]))[data.y[i]];
  return data.size() ? loss / data.size() : 0.0;
}

TrainResult train_fixture(const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw Error("training set is empty");
  if (cfg.epochs < 0) throw Error("epochs must be non-negative");
  if (!(cfg.lr > 0.0)) throw Error("learning rate must be positive");
  const int classes = std::max(2, data.num_classes());
  for (int y : data.y) {
    if (y < 0 || y >= classes) throw Error("label out of range");
  }
  std::vector<int> widths{data.num_features()};
  for (int h : cfg.hidden) {
    if (h < 1) throw Error("hidden widths must be positive");
    widths.push_back(h);
  }
  widths.push_back(classes);

  Rng rng(cfg.seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double limit = std::sqrt(6.0 / (widths[l] + widths[l + 1]));
    Layer layer;
    layer.weights = Matrix(widths[l + 1], widths[l]);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-limit, limit);
    layer.bias = Vector::Zero(widths[l + 1]);
    layer.activation = cfg.activation;
    layers.push_back(std::move(layer));
  }
  Network net(data.num_features(), cfg.activation, layers);

  const int L = net.num_layers();
  std::vector<Adam> wopt(L), bopt(L);
  for (int l = 0; l < L; ++l) {
    wopt[l].init(layers[l].weights.rows(), layers[l].weights.cols());
    bopt[l].init(layers[l].bias.size(), 1);
  }
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Matrix> gw(L);
    std::vector<Vector> gb(L);
    for (int l = 0; l < L; ++l) {
      gw[l] = Matrix::Zero(layers[l].weights.rows(), layers[l].weights.cols());
      gb[l] = Vector::Zero(layers[l].bias.size());
    }
    double loss = 0.0;
    for (int i = 0; i < data.size(); ++i) {
      const Trace t = forward_trace(net, data.x[i]);
      const Vector lp = log_softmax(t.post[L]);
      loss -= lp[data.y[i]];
      Vector delta = lp.array().exp();
      delta[data.y[i]] -= 1.0;
      for (int l = L; l >= 1; --l) {
        const Layer& layer = net.layer(l - 1);
        if (l < L) {
          for (Eigen::Index j = 0; j < delta.size(); ++j) {
            delta[j] *= activation_slope(layer.activation, t.pre[l][j], t.post[l][j]);
          }
        }
        gw[l - 1] += delta * t.post[l - 1].transpose();
        gb[l - 1] += delta;
        if (l > 1) delta = layer.weights.transpose() * delta;
      }
    }
    loss /= data.size();
    if (!std::isfinite(loss)) {
      throw Error("training diverged at epoch " + std::to_string(epoch) + " (loss is not finite); lower the learning rate");
    }
    for (int l = 0; l < L; ++l) {
      Matrix b = layers[l].bias;
      wopt[l].step(layers[l].weights, gw[l] / data.size(), cfg.lr, epoch);
      bopt[l].step(b, gb[l] / data.size(), cfg.lr, epoch);
      layers[l].bias = b;
    }
    net = Network(data.num_features(), cfg.activation, layers);
  }
  TrainResult res{net, accuracy(net, data), cross_entropy(net, data)};
  return res;
}

}  // namespace certiq
