#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace certiq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kRelu, kHardTanh, kSigmoid, kTanh, kIdentity };

std::string_view activation_name(Activation act);
Activation parse_activation(std::string_view name);

// relu, hardtanh and identity are exactly representable by linear segments.
bool is_piecewise_linear(Activation act);

double apply_activation(Activation act, double z);

struct Layer {
  Matrix weights;  // n_l x n_{l-1}
  Vector bias;     // n_l
  Activation activation = Activation::kIdentity;

  int out_dim() const { return static_cast<int>(weights.rows()); }
  int in_dim() const { return static_cast<int>(weights.cols()); }
};

// Feedforward classifier. Hidden layers share one activation; the last layer
// is always identity and produces logits.
class Network {
 public:
  Network() = default;
  Network(int input_dim, Activation hidden, std::vector<Layer> layers);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return layers_.back().out_dim(); }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  Activation hidden_activation() const { return hidden_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(int l) const { return layers_[l]; }

  // Layers [first, last) as a standalone network. The new network's input
  // is the post-activation output of layer first-1.
  Network slice(int first, int last) const;

 private:
  int input_dim_ = 0;
  Activation hidden_ = Activation::kRelu;
  std::vector<Layer> layers_;
};

struct Sample {
  Vector x;
  int label = 0;
};

// Per-layer 0/1 masks with the same shapes as the weights. Biases are never pruned.
struct PruneMask {
  std::vector<Matrix> masks;
};

struct PrunedNetwork {
  Network pruned;
  std::vector<Matrix> residuals;  // W_l - W_l ⊙ M_l
};

Vector forward_eval(const Network& net, const Vector& x);

// Pre- and post-activation values of every layer, index 0 is the input.
struct Trace {
  std::vector<Vector> pre;   // pre[l] for l = 1..L (pre[0] unused, empty)
  std::vector<Vector> post;  // post[0] = x
};
Trace forward_trace(const Network& net, const Vector& x);

double logit_margin(const Vector& logits, int label);

// Margin of label against one specific competitor.
double pair_margin(const Vector& logits, int label, int target);

double op_norm_inf(const Matrix& m);

PrunedNetwork apply_mask(const Network& net, const PruneMask& mask);

// JSON document {input_dim, activation, layers: [{rows, cols, weights, bias}]}.
std::string network_to_json(const Network& net);
Network network_from_json(std::string_view text);
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

// {layers: [{rows, cols, mask}]} with 0/1 entries, row-major.
PruneMask mask_from_json(std::string_view text);
std::string mask_to_json(const PruneMask& mask);
PruneMask load_mask(const std::string& path);

}  // namespace certiq
