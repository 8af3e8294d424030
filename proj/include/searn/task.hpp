#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "searn/cost_sensitive.hpp"
#include "searn/decision.hpp"
#include "searn/policy.hpp"

namespace searn {

enum class SlotKind { choice, density };

// Examples produced by one pass of the reduction, grouped by slot.
struct TrainingSet {
  std::vector<std::vector<CostSensitiveExample>> choice;
  std::vector<std::vector<DensityExample>> density;

  TrainingSet() = default;
  explicit TrainingSet(std::size_t slots) : choice(slots), density(slots) {}

  std::size_t choice_count() const;
  std::size_t density_count() const;
  void append(TrainingSet&& other);
  bool operator==(const TrainingSet&) const = default;
};

// Plugin contract: a structured problem decomposed into a sequence of
// decisions, together with its dataset and loss.
class Task {
 public:
  virtual ~Task() = default;

  virtual std::size_t size() const = 0;
  virtual std::size_t num_slots() const = 0;
  virtual SlotKind slot_kind(std::size_t /*slot*/) const { return SlotKind::choice; }
  // Action count of a choice slot, outcome count of a density slot.
  virtual std::size_t slot_classes(std::size_t slot) const = 0;
  // Number of distinct conditions of a density slot.
  virtual std::size_t slot_conditions(std::size_t /*slot*/) const { return 0; }

  // Upper bound on decisions for one example; exceeding it is a contract
  // violation.
  virtual std::size_t max_decisions(std::size_t example) const = 0;

  // Runs one example to completion, asking `decider` for every decision in
  // order, and returns the loss of the produced structure.
  virtual double run(std::size_t example, Decider& decider) const = 0;

  // Stable identity used to derive per-example random streams.
  virtual std::uint64_t example_key(std::size_t example) const { return example; }

  // Closed-form expected losses (exact rollout mode).
  virtual bool has_exact_costs() const { return false; }
  virtual std::vector<double> exact_costs(std::size_t example, std::size_t step,
                                          std::span<const int> prefix, const Policy& policy,
                                          const FeatureInterner& interner) const;
  virtual TrainingSet exact_examples(std::size_t example, const Policy& policy,
                                     FeatureInterner& interner) const;
};

}  // namespace searn
