#include "searn/task_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "searn/error.hpp"
#include "searn/searn.hpp"

namespace searn {

namespace {

void word_features(const DocumentCounts& doc, FeatureBuilder& fb) {
  for (const auto& [v, c] : doc.counts) fb.add(cluster_word_feature(v), c);
}

void emit_features(int cluster, const DocumentCounts& doc, FeatureBuilder& fb) {
  fb.add("cluster=" + std::to_string(cluster));
  fb.add("total", doc.total);
}

// -log rho_k for a component's latent classifier; zero when it has none.
std::vector<double> prior_costs(const PolicyComponent& comp, std::size_t K) {
  std::vector<double> out(K, 0.0);
  if (!comp.rule) return out;
  if (const auto* nb = std::get_if<NBModel>(&comp.rule->slots[ClusterTask::kClusterSlot])) {
    for (std::size_t k = 0; k < K; ++k) out[k] = -nb->class_log_prior[k];
  }
  return out;
}

}  // namespace

double cluster_loss(const DocumentCounts& doc, std::span<const double> probs) {
  double loss = 0.0;
  for (const auto& [v, c] : doc.counts) {
    require(v >= 0 && static_cast<std::size_t>(v) < probs.size(), ErrorKind::data,
            "word id outside the predicted distribution");
    double p = probs[static_cast<std::size_t>(v)];
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    loss -= c * std::log(p);
  }
  return loss;
}

std::string cluster_word_feature(int word) { return "w=" + std::to_string(word); }

ClusterTask::ClusterTask(std::vector<DocumentCounts> docs, ClusterTaskConfig config)
    : docs_(std::move(docs)), config_(config) {
  // K = 1 is allowed: it is the degenerate single-cluster case.
  require(config_.K >= 1, ErrorKind::config, "cluster count K must be positive");
  require(config_.V >= 2, ErrorKind::config, "vocabulary size V must be at least 2");
  for (std::size_t n = 0; n < docs_.size(); ++n) {
    const auto& d = docs_[n];
    int total = 0;
    for (const auto& [v, c] : d.counts) {
      if (v < 0 || static_cast<std::size_t>(v) >= config_.V || c < 0) {
        fail(ErrorKind::data, "document " + std::to_string(n) + " has an invalid word count");
      }
      total += c;
    }
    require(total == d.total && total >= 1, ErrorKind::data,
            "document " + std::to_string(n) + " has an inconsistent or zero total");
  }
}

std::vector<double> ClusterTask::empirical(std::size_t example) const {
  const auto& doc = docs_[example];
  std::vector<double> p(config_.V, 0.0);
  for (const auto& [v, c] : doc.counts) {
    p[static_cast<std::size_t>(v)] = static_cast<double>(c) / doc.total;
  }
  return p;
}

double ClusterTask::run(std::size_t example, Decider& decider) const {
  const auto& doc = docs_.at(example);
  std::vector<int> legal(config_.K);
  for (std::size_t k = 0; k < config_.K; ++k) legal[k] = static_cast<int>(k);

  auto f1 = [&](FeatureBuilder& fb) { word_features(doc, fb); };
  ChoiceDecision pick;
  pick.slot = kClusterSlot;
  pick.num_actions = config_.K;
  pick.legal = legal;
  pick.reference = Reference::uniform;
  pick.features = f1;
  const int k = decider.choose(pick);

  // The initial policy emits the document's own word distribution.
  const auto reference = empirical(example);
  std::vector<std::pair<int, double>> target;
  for (const auto& [v, c] : doc.counts) target.emplace_back(v, c);
  auto f2 = [&](FeatureBuilder& fb) { emit_features(k, doc, fb); };
  DensityDecision emit;
  emit.slot = kEmitSlot;
  emit.condition = k;
  emit.reference = reference;
  emit.target = target;
  emit.features = f2;
  const auto probs = decider.emit(emit);
  return cluster_loss(doc, probs);
}

std::vector<double> ClusterTask::cluster_posterior(std::size_t example, const Policy& policy,
                                                   const FeatureInterner& interner) const {
  const std::size_t K = config_.K;
  FeatureBuilder fb;
  word_features(docs_.at(example), fb);
  const FeatureVector f = fb.resolve(interner);
  std::vector<double> p(K, 0.0);
  for (const auto& comp : policy.components()) {
    std::vector<double> costs;
    if (comp.rule) costs = slot_costs(comp.rule->slots[kClusterSlot], f);
    if (costs.empty()) {
      for (auto& x : p) x += comp.weight / static_cast<double>(K);
      continue;
    }
    auto q = softmin(std::span(costs).first(K));
    for (std::size_t k = 0; k < K; ++k) p[k] += comp.weight * q[k];
  }
  return p;
}

std::vector<double> ClusterTask::exact_costs(std::size_t example, std::size_t step,
                                             std::span<const int> prefix, const Policy& policy,
                                             const FeatureInterner&) const {
  require(config_.exact_mode, ErrorKind::config, "cluster task is not in exact mode");
  const auto& doc = docs_.at(example);
  const std::size_t K = config_.K;
  const auto reference = empirical(example);
  std::vector<std::pair<int, double>> target;
  for (const auto& [v, c] : doc.counts) target.emplace_back(v, c);

  auto emit_loss = [&](const PolicyComponent& comp, int k) {
    DensityDecision d;
    d.slot = kEmitSlot;
    d.condition = k;
    d.reference = reference;
    d.target = target;
    return cluster_loss(doc, component_emit(comp, d));
  };

  if (step == 1) {
    // Expected loss of picking k: the prior term of the latent classifier
    // plus the document log loss under the emitter for cluster k.
    std::vector<double> costs(K, 0.0);
    for (const auto& comp : policy.components()) {
      auto prior = prior_costs(comp, K);
      for (std::size_t k = 0; k < K; ++k) {
        costs[k] += comp.weight * (prior[k] + emit_loss(comp, static_cast<int>(k)));
      }
    }
    return costs;
  }
  require(step == 2 && prefix.size() == 1, ErrorKind::parameter,
          "cluster examples have exactly two decisions");
  double loss = 0.0;
  for (const auto& comp : policy.components()) loss += comp.weight * emit_loss(comp, prefix[0]);
  return {loss};
}

TrainingSet ClusterTask::exact_examples(std::size_t example, const Policy& policy,
                                        FeatureInterner& interner) const {
  const auto& doc = docs_.at(example);
  TrainingSet out(num_slots());

  FeatureBuilder fb;
  word_features(doc, fb);
  CostSensitiveExample cs;
  cs.features = fb.resolve(interner, true);
  cs.costs = exact_costs(example, 1, {}, policy, interner);
  double lo = *std::min_element(cs.costs.begin(), cs.costs.end());
  for (double& c : cs.costs) c = std::isfinite(c) ? c - lo : 1e12;
  cs.legal.assign(config_.K, 1);
  cs.example = example;
  cs.step = 1;
  out.choice[kClusterSlot].push_back(std::move(cs));

  const auto post = cluster_posterior(example, policy, interner);
  for (std::size_t k = 0; k < config_.K; ++k) {
    if (post[k] <= 0.0) continue;
    FeatureBuilder eb;
    emit_features(static_cast<int>(k), doc, eb);
    DensityExample de;
    de.features = eb.resolve(interner, true);
    de.condition = static_cast<int>(k);
    for (const auto& [v, c] : doc.counts) de.counts.emplace_back(v, c);
    de.weight = post[k];
    de.example = example;
    out.density[kEmitSlot].push_back(std::move(de));
  }
  return out;
}

std::shared_ptr<LearnedRule> cluster_rule_from_params(const MultinomialMixtureParams& params,
                                                     FeatureInterner& interner) {
  const std::size_t K = params.num_clusters();
  const std::size_t V = params.vocab_size();
  std::vector<FeatureId> ids(V);
  for (std::size_t v = 0; v < V; ++v) ids[v] = interner.intern(cluster_word_feature(static_cast<int>(v)));

  NBModel nb;
  nb.class_log_prior.resize(K);
  nb.feature_log_prob = Table(K, interner.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < K; ++k) {
    nb.class_log_prior[k] = std::log(params.rho[k]);
    for (std::size_t v = 0; v < V; ++v) nb.feature_log_prob(k, ids[v]) = std::log(params.theta(k, v));
  }
  MultinomialEstimator est;
  est.probs = params.theta;

  auto rule = std::make_shared<LearnedRule>();
  rule->slots.resize(2);
  if (K > 1) rule->slots[ClusterTask::kClusterSlot] = std::move(nb);
  rule->slots[ClusterTask::kEmitSlot] = std::move(est);
  return rule;
}

MultinomialMixtureParams cluster_params_from_rule(const LearnedRule& rule, std::size_t K,
                                                  std::size_t V, const FeatureInterner& interner) {
  MultinomialMixtureParams p;
  p.rho.assign(K, 1.0 / static_cast<double>(K));
  p.theta = Table(K, V, 0.0);
  const auto* nb = std::get_if<NBModel>(&rule.slots.at(ClusterTask::kClusterSlot));
  if (nb) {
    for (std::size_t k = 0; k < K; ++k) p.rho[k] = std::exp(nb->class_log_prior[k]);
  }
  for (std::size_t v = 0; v < V; ++v) {
    auto id = interner.find(cluster_word_feature(static_cast<int>(v)));
    for (std::size_t k = 0; k < K; ++k) {
      if (nb && id && *id < nb->num_features()) {
        p.theta(k, v) = std::exp(nb->feature_log_prob(k, *id));
      } else if (const auto* est = std::get_if<MultinomialEstimator>(&rule.slots.at(ClusterTask::kEmitSlot))) {
        p.theta(k, v) = est->probs(k, v);
      }
    }
  }
  return p;
}

EquivalenceReport run_equivalence(std::span<const DocumentCounts> docs, std::size_t K,
                                  std::size_t V, std::size_t iterations,
                                  const MultinomialMixtureParams& em_init,
                                  const MultinomialMixtureParams& searn_init, double tolerance) {
  require(em_init == searn_init, ErrorKind::parameter,
          "EM and SEARN must start from identical parameters");
  require(em_init.num_clusters() == K && em_init.vocab_size() == V, ErrorKind::parameter,
          "initial parameters do not match K and V");
  require(iterations >= 1, ErrorKind::parameter, "at least one iteration is required");

  EquivalenceReport report;
  report.tolerance = tolerance;
  auto em = mm_em_train(docs, em_init, iterations);

  ClusterTask task({docs.begin(), docs.end()}, {K, V, true});
  FeatureInterner interner;
  auto init_rule = cluster_rule_from_params(searn_init, interner);

  SearnOptions opt;
  opt.beta = 1.0;
  opt.rollout.mode = RolloutMode::exact;
  opt.learner.kind = LearnerKind::naive_bayes;
  opt.learner.weight_mode = WeightMode::softmin;
  opt.learner.nb_smoothing = 0.0;
  opt.learner.density_smoothing = 0.0;
  opt.stopping.max_iterations = iterations;

  std::vector<std::shared_ptr<const LearnedRule>> rules;
  searn_learn(task, opt, interner, Policy::initial(init_rule),
              [&](const IterationReport&, const LearnedRule& h, const Policy&) {
                rules.push_back(std::make_shared<LearnedRule>(h));
              });

  report.passed = rules.size() == iterations;
  for (std::size_t it = 0; it < rules.size(); ++it) {
    const auto& h = *rules[it];
    const auto mine = cluster_params_from_rule(h, K, V, interner);
    double diff = 0.0;
    for (std::size_t k = 0; k < K; ++k) diff = std::max(diff, std::abs(mine.rho[k] - em[it].rho[k]));
    for (std::size_t i = 0; i < mine.theta.data.size(); ++i) {
      diff = std::max(diff, std::abs(mine.theta.data[i] - em[it].theta.data[i]));
    }
    // The emitter must agree as well.
    if (const auto* est = std::get_if<MultinomialEstimator>(&h.slots[ClusterTask::kEmitSlot])) {
      for (std::size_t i = 0; i < est->probs.data.size(); ++i) {
        diff = std::max(diff, std::abs(est->probs.data[i] - em[it].theta.data[i]));
      }
    } else {
      diff = std::numeric_limits<double>::infinity();
    }
    if (!(diff < tolerance)) report.passed = false;
    report.max_abs_diff.push_back(diff);
    report.em_log_likelihood.push_back(mm_log_likelihood(em[it], docs));
    report.searn_log_likelihood.push_back(mm_log_likelihood(mine, docs));
  }
  return report;
}

}  // namespace searn
