#include "searn/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "searn/error.hpp"

namespace searn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_legal(std::span<const char> legal, std::size_t k) {
  return legal.empty() || legal[k] != 0;
}

double dot(std::span<const double> row, const FeatureVector& f) {
  double s = 0.0;
  for (const auto& [id, value] : f.entries) {
    if (id < row.size()) s += row[id] * value;
  }
  return s;
}

// max(scores) - scores, with all-(-inf) rows mapped to zeros.
std::vector<double> min_subtracted_costs(const std::vector<double>& scores) {
  double best = -kInf;
  for (double s : scores) best = std::max(best, s);
  std::vector<double> costs(scores.size(), 0.0);
  if (best == -kInf) return costs;
  for (std::size_t k = 0; k < scores.size(); ++k) costs[k] = best - scores[k];
  return costs;
}

}  // namespace

std::vector<double> softmin(std::span<const double> costs) {
  std::vector<double> out(costs.size(), 0.0);
  if (costs.empty()) return out;
  double lo = *std::min_element(costs.begin(), costs.end());
  if (!std::isfinite(lo)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    out[k] = std::exp(-(costs[k] - lo));
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

int argmin_legal(std::span<const double> costs, std::span<const char> legal) {
  int best = -1;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (!is_legal(legal, k)) continue;
    if (best < 0 || costs[k] < costs[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

std::vector<WeightedLabel> costs_to_weighted_labels(const CostSensitiveExample& example,
                                                    WeightMode mode) {
  const auto& c = example.costs;
  std::span<const char> legal = example.legal;
  require(legal.empty() || legal.size() == c.size(), ErrorKind::parameter,
          "legal mask length differs from cost vector length");

  double lo = kInf;
  double hi = -kInf;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!is_legal(legal, k)) continue;
    lo = std::min(lo, c[k]);
    hi = std::max(hi, c[k]);
  }
  require(lo < hi, ErrorKind::parameter,
          "constant cost vector carries no training signal");

  if (mode == WeightMode::argmin_spread) {
    return {{argmin_legal(c, legal), (hi - lo) * example.weight}};
  }

  std::vector<WeightedLabel> out;
  double total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!is_legal(legal, k)) continue;
    double w = std::exp(-(c[k] - lo));
    out.push_back({static_cast<int>(k), w});
    total += w;
  }
  for (auto& wl : out) wl.weight = wl.weight / total * example.weight;
  return out;
}

std::vector<LabeledExample> to_labeled(std::span<const CostSensitiveExample> examples,
                                       WeightMode mode) {
  std::vector<LabeledExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    for (const auto& wl : costs_to_weighted_labels(ex, mode)) {
      if (wl.weight > 0.0) out.push_back({ex.features, wl.label, wl.weight});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> NBModel::predict_costs(const FeatureVector& f) const {
  const std::size_t k_count = num_classes();
  std::vector<double> scores(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    double s = class_log_prior[k];
    auto row = feature_log_prob.row(k);
    for (const auto& [id, value] : f.entries) {
      if (id >= row.size()) continue;
      s += row[id] == -kInf ? -kInf : row[id] * value;
    }
    scores[k] = s;
  }
  return min_subtracted_costs(scores);
}

NBModel nb_train(std::span<const LabeledExample> examples, std::size_t num_classes,
                 std::size_t num_features, double smoothing) {
  require(num_classes >= 1, ErrorKind::parameter, "naive Bayes needs at least one class");
  require(smoothing >= 0.0, ErrorKind::parameter, "smoothing must be nonnegative");

  std::vector<double> class_weight(num_classes, 0.0);
  Table counts(num_classes, num_features, 0.0);
  for (const auto& ex : examples) {
    require(ex.label >= 0 && static_cast<std::size_t>(ex.label) < num_classes,
            ErrorKind::parameter, "label out of range");
    require(ex.weight >= 0.0, ErrorKind::parameter, "example weights must be nonnegative");
    auto k = static_cast<std::size_t>(ex.label);
    class_weight[k] += ex.weight;
    for (const auto& [id, value] : ex.features.entries) {
      require(value >= 0.0, ErrorKind::parameter,
              "naive Bayes features must be nonnegative counts");
      if (id < num_features) counts(k, id) += ex.weight * value;
    }
  }

  NBModel model;
  model.smoothing = smoothing;
  model.class_log_prior.resize(num_classes);
  double prior_total = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (class_weight[k] <= 0.0 && smoothing == 0.0) {
      fail(ErrorKind::parameter,
           "class " + std::to_string(k) + " has zero total weight and smoothing is 0");
    }
    prior_total += class_weight[k] + smoothing;
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    model.class_log_prior[k] = std::log((class_weight[k] + smoothing) / prior_total);
  }

  model.feature_log_prob = Table(num_classes, num_features, 0.0);
  const double uniform = num_features > 0 ? -std::log(static_cast<double>(num_features)) : 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto row = counts.row(k);
    double total = std::accumulate(row.begin(), row.end(), 0.0) +
                   smoothing * static_cast<double>(num_features);
    auto out = model.feature_log_prob.row(k);
    for (std::size_t j = 0; j < num_features; ++j) {
      out[j] = total > 0.0 ? std::log((row[j] + smoothing) / total) : uniform;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------

std::vector<double> LRModel::logits(const FeatureVector& f) const {
  std::vector<double> z(num_classes());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = dot(weights.row(k), f);
  return z;
}

std::vector<double> LRModel::predict_costs(const FeatureVector& f) const {
  return min_subtracted_costs(logits(f));
}

double lr_objective(const Table& weights, std::span<const LabeledExample> examples,
                    double l2_variance, Table* gradient) {
  const std::size_t k_count = weights.rows;
  if (gradient) *gradient = Table(weights.rows, weights.cols, 0.0);

  double loss = 0.0;
  std::vector<double> z(k_count);
  for (const auto& ex : examples) {
    double zmax = -kInf;
    for (std::size_t k = 0; k < k_count; ++k) {
      z[k] = dot(weights.row(k), ex.features);
      zmax = std::max(zmax, z[k]);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) norm += std::exp(z[k] - zmax);
    const double log_norm = zmax + std::log(norm);
    loss += ex.weight * (log_norm - z[static_cast<std::size_t>(ex.label)]);

    if (gradient) {
      for (std::size_t k = 0; k < k_count; ++k) {
        double p = std::exp(z[k] - log_norm);
        double coef = ex.weight * (p - (static_cast<int>(k) == ex.label ? 1.0 : 0.0));
        if (coef == 0.0) continue;
        auto grow = gradient->row(k);
        for (const auto& [id, value] : ex.features.entries) {
          if (id < grow.size()) grow[id] += coef * value;
        }
      }
    }
  }

  double sq = 0.0;
  for (double w : weights.data) sq += w * w;
  loss += sq / (2.0 * l2_variance);
  if (gradient) {
    for (std::size_t i = 0; i < weights.data.size(); ++i) {
      gradient->data[i] += weights.data[i] / l2_variance;
    }
  }
  return loss;
}

namespace {

double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

LRModel lr_train(std::span<const LabeledExample> examples, std::size_t num_classes,
                 std::size_t num_features, double l2_variance, const LrOptions& options,
                 std::vector<double>* objective_trace) {
  require(l2_variance > 0.0, ErrorKind::parameter, "l2_variance must be positive");
  require(num_classes >= 1, ErrorKind::parameter, "logistic regression needs a class");
  for (const auto& ex : examples) {
    require(ex.label >= 0 && static_cast<std::size_t>(ex.label) < num_classes,
            ErrorKind::parameter, "label out of range");
  }

  LRModel model;
  model.l2_variance = l2_variance;
  model.weights = Table(num_classes, num_features, 0.0);

  double total_weight = 0.0;
  for (const auto& ex : examples) total_weight += ex.weight;
  const double scale = std::max(total_weight, 1e-12);

  Table grad;
  double obj = lr_objective(model.weights, examples, l2_variance, &grad);
  if (objective_trace) objective_trace->assign(1, obj);

  double step = options.initial_step;
  Table trial;
  Table trial_grad;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const double gnorm2 = squared_norm(grad.data);
    if (std::sqrt(gnorm2) / scale < options.grad_tolerance) break;

    bool accepted = false;
    double t = step;
    double trial_obj = 0.0;
    for (int bt = 0; bt <= options.max_backtracks; ++bt) {
      trial = model.weights;
      for (std::size_t i = 0; i < trial.data.size(); ++i) trial.data[i] -= t * grad.data[i];
      trial_obj = lr_objective(trial, examples, l2_variance, &trial_grad);
      if (std::isfinite(trial_obj) && trial_obj <= obj - options.armijo * t * gnorm2) {
        accepted = true;
        break;
      }
      if (!std::isfinite(trial_obj) && bt == options.max_backtracks) {
        std::ostringstream msg;
        msg << "logistic regression diverged: objective not finite at step size " << t;
        fail(ErrorKind::optimizer, msg.str());
      }
      t *= options.backtrack;
    }
    if (!accepted) break;  // no further decrease representable

    // Barzilai-Borwein proposal for the next step.
    double sy = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < trial.data.size(); ++i) {
      double s = trial.data[i] - model.weights.data[i];
      double y = trial_grad.data[i] - grad.data[i];
      sy += s * y;
      ss += s * s;
    }
    step = sy > 0.0 ? ss / sy : 2.0 * t;

    model.weights = std::move(trial);
    grad = std::move(trial_grad);
    obj = trial_obj;
    model.trained_epochs = epoch + 1;
    if (objective_trace) objective_trace->push_back(obj);
  }
  return model;
}

// ---------------------------------------------------------------------------

std::vector<double> MultinomialEstimator::predict(int condition) const {
  if (condition < 0 || static_cast<std::size_t>(condition) >= probs.rows) {
    return std::vector<double>(probs.cols, probs.cols ? 1.0 / static_cast<double>(probs.cols) : 0.0);
  }
  auto row = probs.row(static_cast<std::size_t>(condition));
  return {row.begin(), row.end()};
}

MultinomialEstimator multinomial_train(std::span<const DensityExample> examples,
                                       std::size_t num_conditions, std::size_t num_outcomes,
                                       double smoothing) {
  require(num_outcomes >= 1, ErrorKind::parameter, "estimator needs at least one outcome");
  Table counts(num_conditions, num_outcomes, 0.0);
  for (const auto& ex : examples) {
    require(ex.condition >= 0 && static_cast<std::size_t>(ex.condition) < num_conditions,
            ErrorKind::parameter, "density condition out of range");
    for (const auto& [o, c] : ex.counts) {
      require(o >= 0 && static_cast<std::size_t>(o) < num_outcomes, ErrorKind::parameter,
              "density outcome out of range");
      counts(static_cast<std::size_t>(ex.condition), static_cast<std::size_t>(o)) += ex.weight * c;
    }
  }
  MultinomialEstimator est;
  est.smoothing = smoothing;
  est.probs = Table(num_conditions, num_outcomes, 0.0);
  for (std::size_t c = 0; c < num_conditions; ++c) {
    auto row = counts.row(c);
    double total = std::accumulate(row.begin(), row.end(), 0.0) +
                   smoothing * static_cast<double>(num_outcomes);
    for (std::size_t o = 0; o < num_outcomes; ++o) {
      est.probs(c, o) = total > 0.0 ? (row[o] + smoothing) / total
                                    : 1.0 / static_cast<double>(num_outcomes);
    }
  }
  return est;
}

}  // namespace searn
