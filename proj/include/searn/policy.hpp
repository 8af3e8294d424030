#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "searn/classifiers.hpp"
#include "searn/decision.hpp"
#include "searn/rng.hpp"

namespace searn {

using SlotModel = std::variant<std::monostate, NBModel, LRModel, MultinomialEstimator>;

// The classifier h learned in one iteration: one model per decision slot.
// An empty (monostate) slot acts uniformly at random.
struct LearnedRule {
  std::vector<SlotModel> slots;
  std::size_t iteration = 0;
};

// Per-class costs from a choice-slot model; empty for untrained slots.
std::vector<double> slot_costs(const SlotModel& model, const FeatureVector& f);

enum class ActionMode {
  argmin,  // classifiers take their minimum-cost legal action
  sample,  // classifiers sample from softmin of their costs
};

struct PolicyComponent {
  // Null rule with `initial` set: the task's reference behaviour.
  std::shared_ptr<const LearnedRule> rule;
  double weight = 0.0;
  bool initial = false;
};

// Stochastic mixture over the initial policy and learned rules.
class Policy {
 public:
  Policy() = default;

  // The initial policy alone. A non-null rule makes the initial policy act
  // through that rule (shared initialization with an EM run).
  static Policy initial(std::shared_ptr<const LearnedRule> rule = nullptr);
  static Policy single(std::shared_ptr<const LearnedRule> rule);

  const std::vector<PolicyComponent>& components() const { return components_; }
  bool includes_initial() const;
  std::size_t learned_count() const;

  ActionMode action_mode() const { return action_mode_; }
  void set_action_mode(ActionMode mode) { action_mode_ = mode; }

  // Throws an internal error if the mixture invariants are broken.
  void validate() const;

  // Used by deserialization; validates.
  static Policy from_components(std::vector<PolicyComponent> components, ActionMode mode);

 private:
  std::vector<PolicyComponent> components_;
  ActionMode action_mode_ = ActionMode::argmin;
};

// (1 - beta) old + beta h.
Policy interpolate_policy(const Policy& old, std::shared_ptr<const LearnedRule> h, double beta);

// Drops the initial component and renormalizes the rest.
Policy strip_initial_policy(const Policy& policy);

// Mixture component picked by a uniform draw u in [0, 1).
std::size_t select_component(const Policy& policy, double u);

// Samples a component, then lets it act. `features` of the decision are
// resolved read-only against `interner`.
int policy_act(const Policy& policy, const ChoiceDecision& decision, SplitMix64& rng,
               const FeatureInterner& interner);

std::vector<double> policy_emit(const Policy& policy, const DensityDecision& decision,
                                SplitMix64& rng);

// Output of one specific component at a density decision.
std::vector<double> component_emit(const PolicyComponent& component,
                                   const DensityDecision& decision);

}  // namespace searn
