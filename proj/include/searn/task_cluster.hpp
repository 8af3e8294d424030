#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "searn/data.hpp"
#include "searn/em.hpp"
#include "searn/task.hpp"

namespace searn {

struct ClusterTaskConfig {
  std::size_t K = 2;
  std::size_t V = 2;
  bool exact_mode = false;
};

// -sum_v d_v log theta_v. +inf when a present word has probability 0.
double cluster_loss(const DocumentCounts& doc, std::span<const double> probs);

std::string cluster_word_feature(int word);

// Predict-self clustering: decision 1 picks a cluster from the document
// counts, decision 2 emits a word distribution given the cluster and the
// document length. The loss only looks at the emitted distribution.
class ClusterTask final : public Task {
 public:
  static constexpr std::size_t kClusterSlot = 0;
  static constexpr std::size_t kEmitSlot = 1;

  ClusterTask(std::vector<DocumentCounts> docs, ClusterTaskConfig config);

  const ClusterTaskConfig& config() const { return config_; }
  const std::vector<DocumentCounts>& docs() const { return docs_; }

  std::size_t size() const override { return docs_.size(); }
  std::size_t num_slots() const override { return 2; }
  SlotKind slot_kind(std::size_t slot) const override {
    return slot == kEmitSlot ? SlotKind::density : SlotKind::choice;
  }
  std::size_t slot_classes(std::size_t slot) const override {
    return slot == kEmitSlot ? config_.V : config_.K;
  }
  std::size_t slot_conditions(std::size_t slot) const override {
    return slot == kEmitSlot ? config_.K : 0;
  }
  std::size_t max_decisions(std::size_t) const override { return 2; }
  double run(std::size_t example, Decider& decider) const override;

  bool has_exact_costs() const override { return config_.exact_mode; }
  std::vector<double> exact_costs(std::size_t example, std::size_t step,
                                  std::span<const int> prefix, const Policy& policy,
                                  const FeatureInterner& interner) const override;
  TrainingSet exact_examples(std::size_t example, const Policy& policy,
                             FeatureInterner& interner) const override;

  // Probability that `policy` picks each cluster for a document (the latent
  // classifier acting by its posterior).
  std::vector<double> cluster_posterior(std::size_t example, const Policy& policy,
                                        const FeatureInterner& interner) const;

 private:
  std::vector<double> empirical(std::size_t example) const;

  std::vector<DocumentCounts> docs_;
  ClusterTaskConfig config_;
};

// A learned rule whose latent classifier and emitter both encode `params`.
// Interns the word features of `V` words first if missing.
std::shared_ptr<LearnedRule> cluster_rule_from_params(const MultinomialMixtureParams& params,
                                                     FeatureInterner& interner);

// Reads (rho, theta) back out of a rule's latent naive Bayes classifier.
MultinomialMixtureParams cluster_params_from_rule(const LearnedRule& rule, std::size_t K,
                                                  std::size_t V, const FeatureInterner& interner);

struct EquivalenceReport {
  // Per iteration: max |difference| between EM's (rho, theta) and the
  // parameters of SEARN's latent classifier and emitter.
  std::vector<double> max_abs_diff;
  std::vector<double> em_log_likelihood;
  std::vector<double> searn_log_likelihood;
  double tolerance = 1e-8;
  bool passed = false;
};

// Runs EM and exact-mode SEARN (naive Bayes, softmin weights, no smoothing,
// beta = 1) side by side. The two initializations must be identical.
EquivalenceReport run_equivalence(std::span<const DocumentCounts> docs, std::size_t K,
                                  std::size_t V, std::size_t iterations,
                                  const MultinomialMixtureParams& em_init,
                                  const MultinomialMixtureParams& searn_init,
                                  double tolerance = 1e-8);

}  // namespace searn
