#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "searn/features.hpp"

namespace searn {

// One unit of training data produced by the reduction: the features seen at
// a decision and the (min-subtracted) cost of every action.
struct CostSensitiveExample {
  FeatureVector features;
  std::vector<double> costs;  // one per action in the decision's action space
  std::vector<char> legal;    // legal[k] != 0 iff action k was legal
  double weight = 1.0;
  std::size_t example = 0;  // originating structured example
  std::size_t step = 0;     // 1-based decision index

  bool operator==(const CostSensitiveExample&) const = default;
};

// Training data for a density decision: the observation to be explained,
// conditioned on a discrete value chosen earlier (e.g. a cluster id).
struct DensityExample {
  FeatureVector features;
  int condition = 0;
  std::vector<std::pair<int, double>> counts;  // observation id -> count
  double weight = 1.0;
  std::size_t example = 0;

  bool operator==(const DensityExample&) const = default;
};

// A hard-labelled weighted example, the input of the base learners.
struct LabeledExample {
  FeatureVector features;
  int label = 0;
  double weight = 1.0;
};

}  // namespace searn
