#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "searn/cost_sensitive.hpp"
#include "searn/table.hpp"

namespace searn {

enum class WeightMode { argmin_spread, softmin };

struct WeightedLabel {
  int label = 0;
  double weight = 0.0;
  bool operator==(const WeightedLabel&) const = default;
};

// Turns a regret vector into weighted labels for a standard multiclass
// learner. Only legal actions receive weight.
std::vector<WeightedLabel> costs_to_weighted_labels(const CostSensitiveExample& example,
                                                    WeightMode mode);

std::vector<LabeledExample> to_labeled(std::span<const CostSensitiveExample> examples,
                                       WeightMode mode);

// exp(-c_k) normalized over the entries of `costs`.
std::vector<double> softmin(std::span<const double> costs);

// Index of the smallest cost among legal actions; ties go to the lowest id.
// An empty `legal` means every action is legal.
int argmin_legal(std::span<const double> costs, std::span<const char> legal = {});

// ---------------------------------------------------------------------------
// Multinomial naive Bayes

struct NBModel {
  std::vector<double> class_log_prior;  // length K
  Table feature_log_prob;               // K x F
  double smoothing = 0.0;

  std::size_t num_classes() const { return class_log_prior.size(); }
  std::size_t num_features() const { return feature_log_prob.cols; }

  // Negative log joint per class, min-subtracted. softmin() of the result is
  // the class posterior. Features unknown to the model are ignored.
  std::vector<double> predict_costs(const FeatureVector& f) const;

  bool operator==(const NBModel&) const = default;
};

NBModel nb_train(std::span<const LabeledExample> examples, std::size_t num_classes,
                 std::size_t num_features, double smoothing);

inline std::vector<double> nb_predict_costs(const NBModel& model, const FeatureVector& f) {
  return model.predict_costs(f);
}

// ---------------------------------------------------------------------------
// Multiclass logistic regression with a Gaussian prior

struct LRModel {
  Table weights;  // K x F
  double l2_variance = 1.0;
  int trained_epochs = 0;

  std::size_t num_classes() const { return weights.rows; }
  std::size_t num_features() const { return weights.cols; }

  std::vector<double> logits(const FeatureVector& f) const;
  // Negative log softmax probabilities, min-subtracted.
  std::vector<double> predict_costs(const FeatureVector& f) const;

  bool operator==(const LRModel&) const = default;
};

struct LrOptions {
  int max_epochs = 500;
  // Stop once ||gradient|| / total example weight falls below this.
  double grad_tolerance = 1e-6;
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

// Weighted multiclass log loss plus ||W||^2 / (2 variance). Fills `gradient`
// (same shape as W) when non-null.
double lr_objective(const Table& weights, std::span<const LabeledExample> examples,
                    double l2_variance, Table* gradient);

LRModel lr_train(std::span<const LabeledExample> examples, std::size_t num_classes,
                 std::size_t num_features, double l2_variance, const LrOptions& options = {},
                 std::vector<double>* objective_trace = nullptr);

inline std::vector<double> lr_predict_costs(const LRModel& model, const FeatureVector& f) {
  return model.predict_costs(f);
}

// ---------------------------------------------------------------------------
// Per-condition maximum-likelihood multinomial estimator (density decisions)

struct MultinomialEstimator {
  Table probs;  // conditions x outcomes
  double smoothing = 0.0;

  // Uniform when the condition was never observed.
  std::vector<double> predict(int condition) const;

  bool operator==(const MultinomialEstimator&) const = default;
};

MultinomialEstimator multinomial_train(std::span<const DensityExample> examples,
                                       std::size_t num_conditions, std::size_t num_outcomes,
                                       double smoothing);

}  // namespace searn
