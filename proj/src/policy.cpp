#include "searn/policy.hpp"

#include <cmath>
#include <sstream>

#include "searn/error.hpp"

namespace searn {

namespace {

constexpr double kWeightTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int uniform_legal(std::span<const int> legal, SplitMix64& rng) {
  auto n = legal.size();
  auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  return legal[std::min(idx, n - 1)];
}

int classifier_act(const std::vector<double>& costs, const ChoiceDecision& d, ActionMode mode,
                   SplitMix64& rng) {
  if (mode == ActionMode::argmin) {
    int best = d.legal.front();
    for (int a : d.legal) {
      if (costs[static_cast<std::size_t>(a)] < costs[static_cast<std::size_t>(best)]) best = a;
    }
    return best;
  }
  std::vector<double> legal_costs;
  legal_costs.reserve(d.legal.size());
  for (int a : d.legal) legal_costs.push_back(costs[static_cast<std::size_t>(a)]);
  auto p = softmin(legal_costs);
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return d.legal[i];
  }
  return d.legal.back();
}

}  // namespace

std::vector<double> slot_costs(const SlotModel& model, const FeatureVector& f) {
  return std::visit(Overloaded{
                        [](const std::monostate&) { return std::vector<double>{}; },
                        [&](const NBModel& m) { return m.predict_costs(f); },
                        [&](const LRModel& m) { return m.predict_costs(f); },
                        [](const MultinomialEstimator&) -> std::vector<double> {
                          fail(ErrorKind::internal, "density model used for a choice decision");
                        },
                    },
                    model);
}

Policy Policy::initial(std::shared_ptr<const LearnedRule> rule) {
  Policy p;
  p.components_.push_back({std::move(rule), 1.0, true});
  return p;
}

Policy Policy::single(std::shared_ptr<const LearnedRule> rule) {
  require(rule != nullptr, ErrorKind::parameter, "learned rule is null");
  Policy p;
  p.components_.push_back({std::move(rule), 1.0, false});
  return p;
}

Policy Policy::from_components(std::vector<PolicyComponent> components, ActionMode mode) {
  Policy p;
  p.components_ = std::move(components);
  p.action_mode_ = mode;
  p.validate();
  return p;
}

bool Policy::includes_initial() const {
  return !components_.empty() && components_.front().initial;
}

std::size_t Policy::learned_count() const {
  std::size_t n = 0;
  for (const auto& c : components_) n += c.initial ? 0 : 1;
  return n;
}

void Policy::validate() const {
  require(!components_.empty(), ErrorKind::internal, "policy has no components");
  double total = 0.0;
  std::size_t initials = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    require(c.weight >= 0.0, ErrorKind::internal, "negative mixture weight");
    total += c.weight;
    if (c.initial) {
      ++initials;
      require(i == 0, ErrorKind::internal, "initial policy must be component 0");
    } else {
      require(c.rule != nullptr, ErrorKind::internal, "learned component without a rule");
    }
  }
  require(initials <= 1, ErrorKind::internal, "more than one initial component");
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream msg;
    msg << "mixture weights sum to " << total;
    fail(ErrorKind::internal, msg.str());
  }
}

Policy interpolate_policy(const Policy& old, std::shared_ptr<const LearnedRule> h, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    std::ostringstream msg;
    msg << "beta must lie in (0, 1], got " << beta;
    fail(ErrorKind::parameter, msg.str());
  }
  require(h != nullptr, ErrorKind::parameter, "learned rule is null");
  old.validate();

  std::vector<PolicyComponent> comps;
  if (beta < 1.0) {
    for (const auto& c : old.components()) comps.push_back({c.rule, c.weight * (1.0 - beta), c.initial});
  }
  comps.push_back({std::move(h), beta, false});
  if (beta < 1.0) {
    // The old weights sum to 1 only up to rounding; absorb the residue into
    // the newest component so the sum stays exact.
    double rest = 0.0;
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) rest += comps[i].weight;
    comps.back().weight = 1.0 - rest;
  }
  return Policy::from_components(std::move(comps), old.action_mode());
}

Policy strip_initial_policy(const Policy& policy) {
  policy.validate();
  std::vector<PolicyComponent> comps;
  double total = 0.0;
  for (const auto& c : policy.components()) {
    if (c.initial) continue;
    comps.push_back(c);
    total += c.weight;
  }
  require(!comps.empty() && total > 0.0, ErrorKind::training,
          "policy has no learned component to keep");
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    comps[i].weight /= total;
    rest += comps[i].weight;
  }
  comps.back().weight = 1.0 - rest;
  return Policy::from_components(std::move(comps), policy.action_mode());
}

std::size_t select_component(const Policy& policy, double u) {
  const auto& comps = policy.components();
  double acc = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    acc += comps[i].weight;
    if (u < acc) return i;
  }
  return comps.size() - 1;
}

int policy_act(const Policy& policy, const ChoiceDecision& decision, SplitMix64& rng,
               const FeatureInterner& interner) {
  require(!decision.legal.empty(), ErrorKind::state, "no legal action at this decision");
  const auto& comp = policy.components()[select_component(policy, rng.uniform())];

  if (!comp.rule) {
    if (decision.reference == Reference::action) return decision.reference_action;
    return uniform_legal(decision.legal, rng);
  }
  require(decision.slot < comp.rule->slots.size(), ErrorKind::internal,
          "learned rule lacks the decision's slot");
  const SlotModel& model = comp.rule->slots[decision.slot];
  if (std::holds_alternative<std::monostate>(model)) return uniform_legal(decision.legal, rng);

  FeatureBuilder fb;
  if (decision.features) decision.features(fb);
  auto costs = slot_costs(model, fb.resolve(interner));
  require(costs.size() >= decision.num_actions, ErrorKind::internal,
          "classifier has fewer classes than the action space");
  return classifier_act(costs, decision, policy.action_mode(), rng);
}

std::vector<double> policy_emit(const Policy& policy, const DensityDecision& decision,
                                SplitMix64& rng) {
  return component_emit(policy.components()[select_component(policy, rng.uniform())], decision);
}

std::vector<double> component_emit(const PolicyComponent& comp, const DensityDecision& decision) {
  if (!comp.rule) return {decision.reference.begin(), decision.reference.end()};
  const SlotModel& model = comp.rule->slots.at(decision.slot);
  if (const auto* est = std::get_if<MultinomialEstimator>(&model)) {
    return est->predict(decision.condition);
  }
  const auto n = decision.reference.size();
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace searn
