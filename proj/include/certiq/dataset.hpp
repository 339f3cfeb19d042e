#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "certiq/network.hpp"

namespace certiq {

struct Dataset {
  std::vector<Vector> x;
  std::vector<int> y;
  std::vector<std::string> class_names;  // index = label

  int size() const { return static_cast<int>(x.size()); }
  int num_features() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
};

// Two interleaving half circles: the first n/2 points form the outer moon
// (label 0), the rest the inner moon (label 1); Gaussian noise on both axes.
Dataset make_two_moons(int n, std::uint64_t seed, double noise = 0.1);

// Numeric feature columns followed by one label column. A header row is
// detected when a feature cell of the first row is not numeric. Integer
// labels are kept; any other labels are numbered in order of appearance.
Dataset parse_csv(std::string_view text);
Dataset load_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& data);
void save_csv(const Dataset& data, const std::string& path);

// Keeps the listed classes and renumbers them 0..k-1 in the given order.
Dataset filter_classes(const Dataset& data, const std::vector<int>& keep);

}  // namespace certiq
