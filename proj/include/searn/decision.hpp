#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "searn/features.hpp"
#include "searn/function_ref.hpp"

namespace searn {

// How the initial policy acts at a choice decision.
enum class Reference {
  action,   // a fixed, known-good action (e.g. the true symbol, the oracle move)
  uniform,  // uniformly random over the legal actions
};

using FeatureFn = FunctionRef<void(FeatureBuilder&)>;

// One atomic prediction over a finite action space.
struct ChoiceDecision {
  std::size_t slot = 0;         // which classifier of a learned rule decides
  std::size_t num_actions = 0;  // size of the action space
  std::span<const int> legal;   // legal action ids, ascending, nonempty
  Reference reference = Reference::uniform;
  int reference_action = -1;
  FeatureFn features;           // computed lazily, only when a classifier acts
};

// A prediction whose "action" is a distribution over outcomes, produced by a
// per-condition estimator (the document-emitting step of the cluster task).
struct DensityDecision {
  std::size_t slot = 0;
  int condition = 0;
  std::span<const double> reference;                 // initial-policy output
  std::span<const std::pair<int, double>> target;    // observation to explain
  FeatureFn features;
};

// Supplies actions to a task while it runs one structured example.
class Decider {
 public:
  virtual ~Decider() = default;
  virtual int choose(const ChoiceDecision& decision) = 0;
  virtual std::vector<double> emit(const DensityDecision& decision) = 0;
};

}  // namespace searn
