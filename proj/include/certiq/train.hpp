#pragma once

#include <cstdint>
#include <vector>

#include "certiq/dataset.hpp"
#include "certiq/network.hpp"

namespace certiq {

struct TrainConfig {
  std::vector<int> hidden{8};
  Activation activation = Activation::kRelu;
  int epochs = 100;
  double lr = 0.01;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Network net;
  double accuracy = 0.0;
  double loss = 0.0;
};

// Glorot-uniform initialisation, then full-batch Adam on softmax
// cross-entropy.
TrainResult train_fixture(const Dataset& data, const TrainConfig& cfg);

double accuracy(const Network& net, const Dataset& data);
double cross_entropy(const Network& net, const Dataset& data);

int predict(const Network& net, const Vector& x);

}  // namespace certiq
