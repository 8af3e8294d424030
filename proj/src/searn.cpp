#include "searn/searn.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "searn/error.hpp"

namespace searn {

namespace {

constexpr std::uint64_t kTrajectoryStream = 0x7472616a65637479ULL;
constexpr std::uint64_t kDevStream = 0x6465767365747321ULL;
constexpr double kCostResolution = 1e-12;
// Infinite structured losses are capped so that stored costs stay finite.
constexpr double kLossCap = 1e12;

bool contains(std::span<const int> legal, int a) {
  return std::find(legal.begin(), legal.end(), a) != legal.end();
}

// What the decider saw at one decision of a followed trajectory.
struct Captured {
  bool density = false;
  std::size_t slot = 0;
  std::size_t num_actions = 0;
  std::vector<int> legal;
  int action = 0;
  FeatureVector features;
  int condition = 0;
  std::vector<std::pair<int, double>> counts;
};

// Replays a prefix, optionally forces one action, then follows the policy.
// Decision t draws from its own stream seeded by (seed, t).
class RolloutDecider final : public Decider {
 public:
  RolloutDecider(const Policy& policy, const FeatureInterner& interner, std::uint64_t seed,
                 std::size_t max_decisions)
      : policy_(policy), interner_(interner), seed_(seed), max_(max_decisions) {}

  void replay(std::span<const int> prefix) { prefix_ = prefix; }
  void force(std::size_t step, int action) {
    forced_step_ = step;
    forced_action_ = action;
  }
  void capture_into(std::vector<Captured>* out, FeatureInterner* insert) {
    capture_ = out;
    insert_ = insert;
  }
  void record_into(Trajectory* out, bool with_features) {
    record_ = out;
    record_features_ = with_features;
  }

  std::size_t decisions() const { return count_; }

  int choose(const ChoiceDecision& d) override {
    const std::size_t t = advance();
    require(!d.legal.empty(), ErrorKind::state,
            "decision " + std::to_string(t) + " has no legal action");
    int action;
    if (t <= prefix_.size()) {
      action = prefix_[t - 1];
      if (!contains(d.legal, action)) {
        fail(ErrorKind::state, "prefix action " + std::to_string(action) +
                                   " is illegal at decision " + std::to_string(t));
      }
    } else if (t == forced_step_) {
      action = forced_action_;
      require(contains(d.legal, action), ErrorKind::state,
              "forced action " + std::to_string(action) + " is illegal");
    } else {
      SplitMix64 rng(mix_seed({seed_, t}));
      action = policy_act(policy_, d, rng, interner_);
    }
    if (capture_ || record_) {
      FeatureBuilder fb;
      bool need = (capture_ != nullptr) || record_features_;
      if (need && d.features) d.features(fb);
      if (capture_) {
        Captured c;
        c.slot = d.slot;
        c.num_actions = d.num_actions;
        c.legal.assign(d.legal.begin(), d.legal.end());
        c.action = action;
        c.features = fb.resolve(*insert_, true);
        capture_->push_back(std::move(c));
      }
      if (record_) {
        DecisionRecord r;
        r.slot = d.slot;
        r.num_actions = d.num_actions;
        r.legal.assign(d.legal.begin(), d.legal.end());
        r.action = action;
        if (record_features_) r.features = fb.raw();
        record_->decisions.push_back(std::move(r));
      }
    }
    return action;
  }

  std::vector<double> emit(const DensityDecision& d) override {
    const std::size_t t = advance();
    std::size_t component;
    if (t <= prefix_.size()) {
      component = static_cast<std::size_t>(prefix_[t - 1]);
      require(component < policy_.components().size(), ErrorKind::state,
              "prefix names a missing mixture component");
    } else {
      SplitMix64 rng(mix_seed({seed_, t}));
      component = select_component(policy_, rng.uniform());
    }
    if (capture_ || record_) {
      FeatureBuilder fb;
      if (d.features) d.features(fb);
      if (capture_) {
        Captured c;
        c.density = true;
        c.slot = d.slot;
        c.num_actions = 1;
        c.legal = {0};
        c.action = static_cast<int>(component);
        c.features = fb.resolve(*insert_, true);
        c.condition = d.condition;
        c.counts.assign(d.target.begin(), d.target.end());
        capture_->push_back(std::move(c));
      }
      if (record_) {
        DecisionRecord r;
        r.density = true;
        r.slot = d.slot;
        r.num_actions = 1;
        r.legal = {0};
        r.action = static_cast<int>(component);
        if (record_features_) r.features = fb.raw();
        record_->decisions.push_back(std::move(r));
      }
    }
    return component_emit(policy_.components()[component], d);
  }

 private:
  std::size_t advance() {
    ++count_;
    if (count_ > max_) {
      fail(ErrorKind::task_contract, "rollout exceeded the declared maximum of " +
                                         std::to_string(max_) + " decisions");
    }
    return count_;
  }

  const Policy& policy_;
  const FeatureInterner& interner_;
  std::uint64_t seed_;
  std::size_t max_;
  std::size_t count_ = 0;
  std::span<const int> prefix_;
  std::size_t forced_step_ = 0;
  int forced_action_ = -1;
  std::vector<Captured>* capture_ = nullptr;
  FeatureInterner* insert_ = nullptr;
  Trajectory* record_ = nullptr;
  bool record_features_ = false;
};

double capped(double loss) { return std::isfinite(loss) ? loss : kLossCap; }

CostVector finish_costs(std::vector<double> raw, std::span<const int> legal) {
  CostVector cv;
  cv.legal.assign(raw.size(), 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int a : legal) {
    auto k = static_cast<std::size_t>(a);
    cv.legal[k] = 1;
    lo = std::min(lo, raw[k]);
    hi = std::max(hi, raw[k]);
  }
  cv.costs.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) cv.costs[k] = (cv.legal[k] ? raw[k] : hi) - lo;
  return cv;
}

bool is_constant(const CostVector& cv) {
  bool seen = false;
  double first = 0.0;
  for (std::size_t k = 0; k < cv.costs.size(); ++k) {
    if (!cv.legal[k]) continue;
    double r = std::round(cv.costs[k] / kCostResolution);
    if (!seen) {
      first = r;
      seen = true;
    } else if (r != first) {
      return false;
    }
  }
  return true;
}

CostVector rollout_costs(const Task& task, std::size_t example, std::size_t step,
                         std::span<const int> prefix, std::span<const int> legal,
                         std::size_t num_actions, const Policy& policy, const RolloutConfig& cfg,
                         const FeatureInterner& interner) {
  std::vector<double> sums(num_actions, 0.0);
  const std::uint64_t key = task.example_key(example);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    for (int a : legal) {
      std::uint64_t seed = cfg.tie_randomness
                               ? mix_seed({cfg.seed, key, step, s})
                               : mix_seed({cfg.seed, key, step, s, static_cast<std::uint64_t>(a) + 1});
      RolloutDecider d(policy, interner, seed, task.max_decisions(example));
      d.replay(prefix);
      d.force(step, a);
      sums[static_cast<std::size_t>(a)] += capped(task.run(example, d));
    }
  }
  for (double& v : sums) v /= static_cast<double>(cfg.n_samples);
  return finish_costs(std::move(sums), legal);
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Item {
  bool density = false;
  std::size_t slot = 0;
  CostSensitiveExample choice;
  DensityExample dens;
};

}  // namespace

std::vector<int> Trajectory::actions() const {
  std::vector<int> out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) out.push_back(d.action);
  return out;
}

void validate_rollout(const RolloutConfig& cfg, const Task& task) {
  require(cfg.n_samples >= 1, ErrorKind::parameter, "n_samples must be at least 1");
  if (cfg.mode == RolloutMode::exact) {
    require(task.has_exact_costs(), ErrorKind::config,
            "exact rollouts need a task with closed-form expected losses");
  }
}

CostVector estimate_costs(const Task& task, std::size_t example, std::size_t step,
                          std::span<const int> prefix, const Policy& policy,
                          const RolloutConfig& cfg, const FeatureInterner& interner) {
  validate_rollout(cfg, task);
  require(step >= 1, ErrorKind::parameter, "decision index is 1-based");
  require(prefix.size() + 1 == step, ErrorKind::parameter, "prefix must hold step - 1 actions");

  if (cfg.mode == RolloutMode::exact) {
    auto raw = task.exact_costs(example, step, prefix, policy, interner);
    std::vector<int> all(raw.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    for (double& c : raw) c = capped(c);
    return finish_costs(std::move(raw), all);
  }

  // Find the action space at `step` by replaying the prefix.
  std::vector<Captured> seen;
  FeatureInterner scratch;
  {
    RolloutDecider probe(policy, interner, mix_seed({cfg.seed, task.example_key(example), 0}),
                         task.max_decisions(example));
    probe.replay(prefix);
    probe.capture_into(&seen, &scratch);
    task.run(example, probe);
  }
  require(seen.size() >= step, ErrorKind::task_contract,
          "example ends before decision " + std::to_string(step));
  const Captured& at = seen[step - 1];
  if (at.density) return finish_costs({0.0}, std::vector<int>{0});
  return rollout_costs(task, example, step, prefix, at.legal, at.num_actions, policy, cfg,
                       interner);
}

TrainingSet generate_examples(const Task& task, const Policy& policy, const RolloutConfig& cfg,
                              FeatureInterner& interner) {
  validate_rollout(cfg, task);
  policy.validate();
  const std::size_t n = task.size();
  const auto first_new = static_cast<FeatureId>(interner.size());
  std::vector<std::vector<Item>> per_example(n);

  if (cfg.mode == RolloutMode::exact) {
    for (std::size_t ex = 0; ex < n; ++ex) {
      TrainingSet ts = task.exact_examples(ex, policy, interner);
      for (std::size_t s = 0; s < ts.choice.size(); ++s) {
        for (auto& c : ts.choice[s]) {
          CostVector cv{c.costs, c.legal};
          if (is_constant(cv)) continue;
          per_example[ex].push_back({false, s, std::move(c), {}});
        }
      }
      for (std::size_t s = 0; s < ts.density.size(); ++s) {
        for (auto& d : ts.density[s]) per_example[ex].push_back({true, s, {}, std::move(d)});
      }
    }
  } else {
    parallel_for(n, cfg.threads, [&](std::size_t ex) {
      const std::uint64_t key = task.example_key(ex);
      std::vector<Captured> traj;
      {
        RolloutDecider follow(policy, interner, mix_seed({cfg.seed, key, kTrajectoryStream}),
                              task.max_decisions(ex));
        follow.capture_into(&traj, &interner);
        task.run(ex, follow);
      }
      std::vector<int> actions;
      actions.reserve(traj.size());
      for (const auto& c : traj) actions.push_back(c.action);

      auto& out = per_example[ex];
      for (std::size_t i = 0; i < traj.size(); ++i) {
        auto& c = traj[i];
        if (c.density) {
          DensityExample de;
          de.features = std::move(c.features);
          de.condition = c.condition;
          de.counts = std::move(c.counts);
          de.example = ex;
          out.push_back({true, c.slot, {}, std::move(de)});
          continue;
        }
        if (c.legal.size() < 2) continue;
        const std::size_t step = i + 1;
        CostVector cv = rollout_costs(task, ex, step, std::span(actions).first(i), c.legal,
                                      c.num_actions, policy, cfg, interner);
        if (is_constant(cv)) continue;
        CostSensitiveExample cs;
        cs.features = std::move(c.features);
        cs.costs = std::move(cv.costs);
        cs.legal = std::move(cv.legal);
        cs.example = ex;
        cs.step = step;
        out.push_back({false, c.slot, std::move(cs), {}});
      }
    });
  }

  std::vector<FeatureVector*> order;
  for (auto& items : per_example) {
    for (auto& it : items) order.push_back(it.density ? &it.dens.features : &it.choice.features);
  }
  interner.canonicalize(first_new, order);

  TrainingSet out(task.num_slots());
  for (auto& items : per_example) {
    for (auto& it : items) {
      require(it.slot < task.num_slots(), ErrorKind::task_contract, "decision slot out of range");
      if (it.density) {
        out.density[it.slot].push_back(std::move(it.dens));
      } else {
        out.choice[it.slot].push_back(std::move(it.choice));
      }
    }
  }
  return out;
}

Trajectory run_policy(const Task& task, std::size_t example, const Policy& policy,
                      std::uint64_t seed, const FeatureInterner& interner, bool record_features) {
  policy.validate();
  Trajectory traj;
  RolloutDecider d(policy, interner, seed, task.max_decisions(example));
  d.record_into(&traj, record_features);
  traj.loss = task.run(example, d);
  return traj;
}

// ---------------------------------------------------------------------------

double LearnerConfig::variance_for(std::size_t slot) const {
  if (lr_variance.empty()) return 1.0;
  return lr_variance[std::min(slot, lr_variance.size() - 1)];
}

std::shared_ptr<LearnedRule> train_rule(const Task& task, const TrainingSet& data,
                                        const LearnerConfig& learner, std::size_t num_features,
                                        std::size_t iteration) {
  auto rule = std::make_shared<LearnedRule>();
  rule->iteration = iteration;
  rule->slots.resize(task.num_slots());
  for (std::size_t s = 0; s < task.num_slots(); ++s) {
    if (task.slot_kind(s) == SlotKind::density) {
      if (s < data.density.size() && !data.density[s].empty()) {
        rule->slots[s] = multinomial_train(data.density[s], task.slot_conditions(s),
                                           task.slot_classes(s), learner.density_smoothing);
      }
      continue;
    }
    if (s >= data.choice.size() || data.choice[s].empty()) continue;
    auto labeled = to_labeled(data.choice[s], learner.weight_mode);
    if (labeled.empty()) continue;
    const std::size_t k = task.slot_classes(s);
    if (learner.kind == LearnerKind::naive_bayes) {
      rule->slots[s] = nb_train(labeled, k, num_features, learner.nb_smoothing);
    } else {
      rule->slots[s] = lr_train(labeled, k, num_features, learner.variance_for(s), learner.lr);
    }
  }
  return rule;
}

namespace {

// Expected (accuracy, regret) of a rule's slot model on one example.
std::pair<double, double> score_example(const SlotModel& model, const CostSensitiveExample& ex) {
  auto costs = slot_costs(model, ex.features);
  if (costs.empty()) {
    double hits = 0.0;
    double regret = 0.0;
    double legal = 0.0;
    for (std::size_t k = 0; k < ex.costs.size(); ++k) {
      if (!ex.legal[k]) continue;
      legal += 1.0;
      regret += ex.costs[k];
      hits += ex.costs[k] <= kCostResolution ? 1.0 : 0.0;
    }
    return {hits / legal, regret / legal};
  }
  auto a = static_cast<std::size_t>(argmin_legal(costs, ex.legal));
  return {ex.costs[a] <= kCostResolution ? 1.0 : 0.0, ex.costs[a]};
}

std::pair<double, double> score_set(const LearnedRule& rule, const TrainingSet& data) {
  double acc = 0.0;
  double regret = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < data.choice.size() && s < rule.slots.size(); ++s) {
    if (std::holds_alternative<MultinomialEstimator>(rule.slots[s])) continue;
    for (const auto& ex : data.choice[s]) {
      auto [a, r] = score_example(rule.slots[s], ex);
      acc += a;
      regret += r;
      ++n;
    }
  }
  if (n == 0) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  return {acc / static_cast<double>(n), regret / static_cast<double>(n)};
}

}  // namespace

double classification_accuracy(const LearnedRule& rule, const TrainingSet& data) {
  return score_set(rule, data).first;
}

double classification_regret(const LearnedRule& rule, const TrainingSet& data) {
  return score_set(rule, data).second;
}

SearnResult searn_learn(const Task& task, const SearnOptions& options, FeatureInterner& interner,
                        Policy initial, const IterationCallback& callback) {
  require(task.size() > 0, ErrorKind::data, "training set is empty");
  require(options.stopping.max_iterations >= 1, ErrorKind::parameter,
          "at least one iteration is required");
  if (!(options.beta > 0.0 && options.beta <= 1.0)) {
    fail(ErrorKind::parameter, "beta must lie in (0, 1]");
  }
  validate_rollout(options.rollout, task);

  Policy policy = std::move(initial);
  policy.set_action_mode(options.action_mode);
  policy.validate();

  SearnResult result;
  Policy best_policy;
  double best_dev = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const Task* dev = options.stopping.dev;

  for (std::size_t it = 1; it <= options.stopping.max_iterations; ++it) {
    auto start = std::chrono::steady_clock::now();
    RolloutConfig cfg = options.rollout;
    cfg.seed = mix_seed({options.rollout.seed, it});

    TrainingSet data = generate_examples(task, policy, cfg, interner);
    auto h = train_rule(task, data, options.learner, interner.size(), it);

    IterationReport report;
    report.iteration = it;
    for (std::size_t s = 0; s < task.num_slots(); ++s) {
      report.examples_per_slot.push_back(task.slot_kind(s) == SlotKind::density
                                             ? data.density[s].size()
                                             : data.choice[s].size());
    }
    report.train_regret = classification_regret(*h, data);
    report.dev_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (dev) {
      RolloutConfig dev_cfg = cfg;
      dev_cfg.seed = mix_seed({cfg.seed, kDevStream});
      TrainingSet dev_data = generate_examples(*dev, policy, dev_cfg, interner);
      report.dev_accuracy = classification_accuracy(*h, dev_data);
    }

    policy = interpolate_policy(policy, h, options.beta);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(report);
    if (callback) callback(report, *h, policy);

    if (!dev) continue;
    double score = std::isnan(report.dev_accuracy) ? 0.0 : report.dev_accuracy;
    if (score > best_dev) {
      best_dev = score;
      best_policy = policy;
      result.best_iteration = it;
      since_best = 0;
    } else if (++since_best >= options.stopping.patience) {
      break;
    }
  }

  if (!dev) {
    best_policy = policy;
    result.best_iteration = result.history.size();
  }
  result.policy = strip_initial_policy(best_policy);
  return result;
}

double searn_bound(double loss_initial, double loss_avg, std::size_t T, double c) {
  require(T >= 1, ErrorKind::parameter, "T must be at least 1");
  require(loss_initial >= 0.0 && loss_avg >= 0.0 && c >= 0.0, ErrorKind::parameter,
          "bound arguments must be nonnegative");
  const double t = static_cast<double>(T);
  const double log_t = std::log(t);
  return loss_initial + 2.0 * loss_avg * t * log_t + c * (1.0 + log_t) / t;
}

// ---------------------------------------------------------------------------

std::size_t TrainingSet::choice_count() const {
  std::size_t n = 0;
  for (const auto& v : choice) n += v.size();
  return n;
}

std::size_t TrainingSet::density_count() const {
  std::size_t n = 0;
  for (const auto& v : density) n += v.size();
  return n;
}

void TrainingSet::append(TrainingSet&& other) {
  if (choice.size() < other.choice.size()) choice.resize(other.choice.size());
  if (density.size() < other.density.size()) density.resize(other.density.size());
  for (std::size_t s = 0; s < other.choice.size(); ++s) {
    for (auto& e : other.choice[s]) choice[s].push_back(std::move(e));
  }
  for (std::size_t s = 0; s < other.density.size(); ++s) {
    for (auto& e : other.density[s]) density[s].push_back(std::move(e));
  }
}

std::vector<double> Task::exact_costs(std::size_t, std::size_t, std::span<const int>,
                                      const Policy&, const FeatureInterner&) const {
  fail(ErrorKind::config, "task has no closed-form expected losses");
}

TrainingSet Task::exact_examples(std::size_t, const Policy&, FeatureInterner&) const {
  fail(ErrorKind::config, "task has no closed-form expected losses");
}

}  // namespace searn
