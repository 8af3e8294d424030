#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "searn/classifiers.hpp"
#include "searn/policy.hpp"
#include "searn/task.hpp"

namespace searn {

enum class RolloutMode { sampled, exact };

struct RolloutConfig {
  std::size_t n_samples = 2;
  bool tie_randomness = true;
  RolloutMode mode = RolloutMode::sampled;
  std::uint64_t seed = 0;
  // Worker threads for example generation; results do not depend on it.
  std::size_t threads = 1;
};

void validate_rollout(const RolloutConfig& cfg, const Task& task);

struct CostVector {
  std::vector<double> costs;  // min-subtracted; illegal actions get the max legal cost
  std::vector<char> legal;
};

// Expected loss of each action at decision `step` (1-based) after `prefix`,
// continuing with `policy`.
CostVector estimate_costs(const Task& task, std::size_t example, std::size_t step,
                          std::span<const int> prefix, const Policy& policy,
                          const RolloutConfig& cfg, const FeatureInterner& interner);

// One pass of the reduction over every example and decision. Constant-cost
// vectors are dropped. Output is a pure function of (task, policy, cfg).
TrainingSet generate_examples(const Task& task, const Policy& policy, const RolloutConfig& cfg,
                              FeatureInterner& interner);

// A completed run of one example.
struct DecisionRecord {
  bool density = false;
  std::size_t slot = 0;
  std::size_t num_actions = 0;
  std::vector<int> legal;
  int action = 0;  // component index for density decisions
  std::vector<std::pair<std::string, double>> features;
};

struct Trajectory {
  std::vector<DecisionRecord> decisions;
  double loss = 0.0;

  std::vector<int> actions() const;
};

Trajectory run_policy(const Task& task, std::size_t example, const Policy& policy,
                      std::uint64_t seed, const FeatureInterner& interner,
                      bool record_features = true);

// ---------------------------------------------------------------------------

enum class LearnerKind { naive_bayes, logistic };

struct LearnerConfig {
  LearnerKind kind = LearnerKind::naive_bayes;
  WeightMode weight_mode = WeightMode::argmin_spread;
  double nb_smoothing = 1e-2;
  // Prior variance per slot; the last entry applies to any further slots.
  std::vector<double> lr_variance = {1.0};
  LrOptions lr;
  double density_smoothing = 1e-2;

  double variance_for(std::size_t slot) const;
};

std::shared_ptr<LearnedRule> train_rule(const Task& task, const TrainingSet& data,
                                        const LearnerConfig& learner, std::size_t num_features,
                                        std::size_t iteration = 0);

// Fraction of cost-sensitive examples on which `rule` picks a zero-regret
// action. NaN when there are none.
double classification_accuracy(const LearnedRule& rule, const TrainingSet& data);
// Mean regret of `rule` over the cost-sensitive examples.
double classification_regret(const LearnedRule& rule, const TrainingSet& data);

struct StoppingRule {
  std::size_t max_iterations = 50;
  std::size_t patience = 3;
  const Task* dev = nullptr;  // no dev set: run max_iterations
};

struct SearnOptions {
  double beta = 0.1;
  RolloutConfig rollout;
  LearnerConfig learner;
  StoppingRule stopping;
  ActionMode action_mode = ActionMode::argmin;
};

struct IterationReport {
  std::size_t iteration = 0;
  std::vector<std::size_t> examples_per_slot;
  double train_regret = 0.0;
  double dev_accuracy = 0.0;  // NaN without a dev set
  double seconds = 0.0;       // wall time; excluded from reproducible outputs
};

struct SearnResult {
  Policy policy;  // initial policy stripped
  std::vector<IterationReport> history;
  std::size_t best_iteration = 0;
};

using IterationCallback =
    std::function<void(const IterationReport&, const LearnedRule&, const Policy&)>;

SearnResult searn_learn(const Task& task, const SearnOptions& options, FeatureInterner& interner,
                        Policy initial = Policy::initial(), const IterationCallback& callback = {});

// loss_initial + 2 loss_avg T ln T + c (1 + ln T) / T
double searn_bound(double loss_initial, double loss_avg, std::size_t T, double c);

}  // namespace searn
