#include "certiq/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "certiq/error.hpp"

namespace certiq {

using nlohmann::json;

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kHardTanh: return "hardtanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "hardtanh") return Activation::kHardTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw Error("unknown activation '" + std::string(name) + "'");
}

bool is_piecewise_linear(Activation act) {
  return act == Activation::kRelu || act == Activation::kHardTanh ||
         act == Activation::kIdentity;
}

double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kHardTanh: return std::clamp(z, -1.0, 1.0);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kTanh: return std::tanh(z);
    case Activation::kIdentity: return z;
  }
  return z;
}

Network::Network(int input_dim, Activation hidden, std::vector<Layer> layers)
    : input_dim_(input_dim), hidden_(hidden), layers_(std::move(layers)) {
  if (input_dim_ <= 0) throw Error("network input_dim must be positive");
  if (layers_.empty()) throw Error("network needs at least one layer");
  int prev = input_dim_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    if (layer.in_dim() != prev) {
      throw Error("layer " + std::to_string(l + 1) + " expects " +
                  std::to_string(layer.in_dim()) + " inputs but previous layer has " +
                  std::to_string(prev));
    }
    if (layer.bias.size() != layer.out_dim()) {
      throw Error("layer " + std::to_string(l + 1) + " bias length mismatch");
    }
    layer.activation = (l + 1 == layers_.size()) ? Activation::kIdentity : hidden_;
    prev = layer.out_dim();
  }
}

Network Network::slice(int first, int last) const {
  if (first < 0 || last > num_layers() || first >= last) {
    throw Error("invalid layer slice");
  }
  std::vector<Layer> part(layers_.begin() + first, layers_.begin() + last);
  int in = part.front().in_dim();
  // A slice that stops before the logits keeps the hidden activation on its
  // last layer; the constructor would force identity there.
  Network out(in, hidden_, part);
  if (last < num_layers()) out.layers_.back().activation = hidden_;
  return out;
}

Trace forward_trace(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim()) {
    throw Error("input has length " + std::to_string(x.size()) + ", layer 1 expects " +
                std::to_string(net.input_dim()));
  }
  Trace t;
  t.pre.resize(net.num_layers() + 1);
  t.post.resize(net.num_layers() + 1);
  t.post[0] = x;
  for (int l = 0; l < net.num_layers(); ++l) {
    const Layer& layer = net.layer(l);
    t.pre[l + 1] = layer.weights * t.post[l] + layer.bias;
    t.post[l + 1] = t.pre[l + 1].unaryExpr(
        [&](double z) { return apply_activation(layer.activation, z); });
  }
  return t;
}

Vector forward_eval(const Network& net, const Vector& x) {
  return forward_trace(net, x).post.back();
}

double logit_margin(const Vector& logits, int label) {
  if (logits.size() < 2) throw Error("logit margin needs at least two classes");
  if (label < 0 || label >= logits.size()) throw Error("label out of range");
  double best_other = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < logits.size(); ++k) {
    if (k != label) best_other = std::max(best_other, logits[k]);
  }
  return logits[label] - best_other;
}

double pair_margin(const Vector& logits, int label, int target) {
  return logits[label] - logits[target];
}

double op_norm_inf(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

PrunedNetwork apply_mask(const Network& net, const PruneMask& mask) {
  if (static_cast<int>(mask.masks.size()) != net.num_layers()) {
    throw Error("mask has " + std::to_string(mask.masks.size()) + " layers, network has " +
                std::to_string(net.num_layers()));
  }
  std::vector<Layer> layers;
  std::vector<Matrix> residuals;
  for (int l = 0; l < net.num_layers(); ++l) {
    const Layer& src = net.layer(l);
    const Matrix& m = mask.masks[l];
    if (m.rows() != src.weights.rows() || m.cols() != src.weights.cols()) {
      throw Error("mask shape mismatch at layer " + std::to_string(l + 1));
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double v = m.data()[i];
      if (v != 0.0 && v != 1.0) throw Error("mask entries must be 0 or 1");
    }
    Layer kept = src;
    kept.weights = src.weights.cwiseProduct(m);
    residuals.push_back(src.weights.cwiseProduct((1.0 - m.array()).matrix()));
    layers.push_back(std::move(kept));
  }
  return {Network(net.input_dim(), net.hidden_activation(), std::move(layers)),
          std::move(residuals)};
}

namespace {

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  return flat;
}

Matrix from_row_major(const json& values, int rows, int cols, const std::string& what) {
  if (!values.is_array() || static_cast<int>(values.size()) != rows * cols) {
    throw Error(what + ": expected " + std::to_string(rows * cols) + " entries");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = values.at(i * cols + j).get<double>();
  return m;
}

json parse_or_throw(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string network_to_json(const Network& net) {
  json doc;
  doc["input_dim"] = net.input_dim();
  doc["activation"] = std::string(activation_name(net.hidden_activation()));
  doc["layers"] = json::array();
  for (const Layer& layer : net.layers()) {
    doc["layers"].push_back({{"rows", layer.out_dim()},
                             {"cols", layer.in_dim()},
                             {"weights", row_major(layer.weights)},
                             {"bias", std::vector<double>(layer.bias.begin(), layer.bias.end())}});
  }
  return doc.dump(2);
}

Network network_from_json(std::string_view text) {
  json doc = parse_or_throw(text);
  try {
    int input_dim = doc.at("input_dim").get<int>();
    Activation act = parse_activation(doc.at("activation").get<std::string>());
    std::vector<Layer> layers;
    int idx = 1;
    for (const json& jl : doc.at("layers")) {
      int rows = jl.at("rows").get<int>();
      int cols = jl.at("cols").get<int>();
      std::string where = "layer " + std::to_string(idx++);
      Layer layer;
      layer.weights = from_row_major(jl.at("weights"), rows, cols, where + " weights");
      const json& bias = jl.at("bias");
      if (static_cast<int>(bias.size()) != rows) throw Error(where + ": bias length mismatch");
      layer.bias.resize(rows);
      for (int i = 0; i < rows; ++i) layer.bias[i] = bias.at(i).get<double>();
      layers.push_back(std::move(layer));
    }
    return Network(input_dim, act, std::move(layers));
  } catch (const json::exception& e) {
    throw Error(std::string("network file: ") + e.what());
  }
}

Network load_network(const std::string& path) { return network_from_json(read_file(path)); }

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << network_to_json(net) << "\n";
}

PruneMask mask_from_json(std::string_view text) {
  json doc = parse_or_throw(text);
  PruneMask mask;
  try {
    int idx = 1;
    for (const json& jl : doc.at("layers")) {
      mask.masks.push_back(from_row_major(jl.at("mask"), jl.at("rows").get<int>(),
                                          jl.at("cols").get<int>(),
                                          "mask layer " + std::to_string(idx++)));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("mask file: ") + e.what());
  }
  return mask;
}

std::string mask_to_json(const PruneMask& mask) {
  json doc;
  doc["layers"] = json::array();
  for (const Matrix& m : mask.masks) {
    doc["layers"].push_back(
        {{"rows", m.rows()}, {"cols", m.cols()}, {"mask", row_major(m)}});
  }
  return doc.dump(2);
}

PruneMask load_mask(const std::string& path) { return mask_from_json(read_file(path)); }

}  // namespace certiq
