#include <cmath>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "searn/error.hpp"
#include "searn/policy.hpp"
#include "searn/searn.hpp"
#include "searn/task_cluster.hpp"
#include "searn/task_sequence.hpp"

using namespace searn;

namespace {

std::shared_ptr<const LearnedRule> empty_rule(std::size_t slots, std::size_t iteration) {
  auto r = std::make_shared<LearnedRule>();
  r->slots.resize(slots);
  r->iteration = iteration;
  return r;
}

// Two-class LR with one feature (id 0) whose logits are (a, b).
std::shared_ptr<const LearnedRule> lr_rule(double a, double b) {
  LRModel m;
  m.weights = Table(2, 1, 0.0);
  m.weights(0, 0) = a;
  m.weights(1, 0) = b;
  auto r = std::make_shared<LearnedRule>();
  r->slots = {m};
  return r;
}

double weight_sum(const Policy& p) {
  double s = 0.0;
  for (const auto& c : p.components()) s += c.weight;
  return s;
}

std::vector<SymbolSequence> random_sequences(SplitMix64& rng, std::size_t n, std::size_t V,
                                             std::size_t max_len) {
  std::vector<SymbolSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t T = 1 + static_cast<std::size_t>(testgen::uniform_int(rng, static_cast<int>(max_len)));
    SymbolSequence s;
    for (std::size_t t = 0; t < T; ++t) s.symbols.push_back(testgen::uniform_int(rng, static_cast<int>(V)));
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("interpolate_policy: beta 1 replaces the mixture") {
  auto h = empty_rule(1, 1);
  auto p = interpolate_policy(Policy::initial(), h, 1.0);
  REQUIRE(p.components().size() == 1);
  CHECK(p.components()[0].rule == h);
  CHECK(p.components()[0].weight == 1.0);
  CHECK_FALSE(p.includes_initial());
}

TEST_CASE("interpolate_policy: two halvings") {
  auto h1 = empty_rule(1, 1), h2 = empty_rule(1, 2);
  auto p = interpolate_policy(interpolate_policy(Policy::initial(), h1, 0.5), h2, 0.5);
  REQUIRE(p.components().size() == 3);
  CHECK(p.components()[0].initial);
  CHECK(p.components()[0].weight == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.components()[1].weight == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.components()[2].weight == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("interpolate_policy: beta 0.1 once") {
  auto p = interpolate_policy(Policy::initial(), empty_rule(1, 1), 0.1);
  CHECK(p.components()[0].weight == doctest::Approx(0.9));
  CHECK(p.components()[1].weight == doctest::Approx(0.1));
}

TEST_CASE("interpolate_policy rejects beta outside (0, 1]") {
  CHECK_THROWS_AS(interpolate_policy(Policy::initial(), empty_rule(1, 1), 0.0), Error);
  CHECK_THROWS_AS(interpolate_policy(Policy::initial(), empty_rule(1, 1), 1.5), Error);
  CHECK_THROWS_AS(interpolate_policy(Policy::initial(), nullptr, 0.5), Error);
}

TEST_CASE("strip_initial_policy renormalizes") {
  auto h1 = empty_rule(1, 1), h2 = empty_rule(1, 2);
  auto a = strip_initial_policy(interpolate_policy(Policy::initial(), h1, 0.1));
  REQUIRE(a.components().size() == 1);
  CHECK(a.components()[0].weight == 1.0);

  auto b = strip_initial_policy(interpolate_policy(interpolate_policy(Policy::initial(), h1, 0.5), h2, 0.5));
  REQUIRE(b.components().size() == 2);
  CHECK(b.components()[0].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b.components()[1].weight == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(strip_initial_policy(Policy::initial()), Error);
}

TEST_CASE("property: mixture weights sum to one after interpolate and strip") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Policy p = Policy::initial();
    int steps = 1 + testgen::uniform_int(rng, 30);
    for (int s = 0; s < steps; ++s) {
      double beta = 1e-3 + (1.0 - 1e-3) * rng.uniform();
      p = interpolate_policy(p, empty_rule(1, static_cast<std::size_t>(s + 1)), beta);
      CHECK(std::abs(weight_sum(p) - 1.0) <= 1e-12);
    }
    auto q = strip_initial_policy(p);
    CHECK(std::abs(weight_sum(q) - 1.0) <= 1e-12);
  }
}

TEST_CASE("policy_act: a single classifier takes its cheapest action") {
  // logits (0.7, 0) give costs (0, 0.7)
  auto p = Policy::single(lr_rule(0.7, 0.0));
  FeatureInterner interner;
  interner.intern("f");
  const int legal[] = {0, 1};
  ChoiceDecision d;
  d.num_actions = 2;
  d.legal = legal;
  auto feats = [](FeatureBuilder& fb) { fb.add("f"); };
  d.features = feats;
  SplitMix64 rng(3);
  CHECK(policy_act(p, d, rng, interner) == 0);
}

TEST_CASE("policy_act: the initial policy emits the true symbol") {
  SequenceTask task({SymbolSequence{{4, 1, 7}}}, {2, 10});
  FeatureInterner interner;
  auto traj = run_policy(task, 0, Policy::initial(), 5, interner);
  auto a = traj.actions();
  REQUIRE(a.size() == 6);
  CHECK(a[3] == 4);
  CHECK(a[4] == 1);
  CHECK(a[5] == 7);
  CHECK(traj.loss == 0.0);
}

TEST_CASE("select_component frequencies follow the mixture weights") {
  auto p = interpolate_policy(interpolate_policy(Policy::initial(), empty_rule(1, 1), 0.5),
                              empty_rule(1, 2), 0.5);
  auto q = interpolate_policy(Policy::initial(), empty_rule(1, 1), 0.75);
  SplitMix64 rng(99);
  const int n = 10000;
  int initial_hits = 0;
  for (int i = 0; i < n; ++i) initial_hits += select_component(q, rng.uniform()) == 0 ? 1 : 0;
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(initial_hits - 0.25 * n) <= 3 * sigma);

  int newest = 0;
  for (int i = 0; i < n; ++i) newest += select_component(p, rng.uniform()) == 2 ? 1 : 0;
  CHECK(std::abs(newest - 0.5 * n) <= 3 * std::sqrt(n * 0.25));
}

TEST_CASE("estimate_costs: last emit decision has immediate Hamming costs") {
  FeatureInterner interner;
  RolloutConfig cfg;
  {
    SequenceTask task({SymbolSequence{{3}}}, {2, 10});
    const int prefix[] = {1};
    auto c = estimate_costs(task, 0, 2, prefix, Policy::initial(), cfg, interner);
    REQUIRE(c.costs.size() == 10);
    for (int v = 0; v < 10; ++v) CHECK(c.costs[static_cast<std::size_t>(v)] == (v == 3 ? 0.0 : 1.0));
  }
  {
    // Longer sequences scale the per-symbol cost by 1/T.
    SequenceTask task({SymbolSequence{{0, 1, 2, 3}}}, {2, 10});
    const int prefix[] = {0, 1, 0, 1, 0, 1, 2};
    auto c = estimate_costs(task, 0, 8, prefix, Policy::initial(), cfg, interner);
    for (int v = 0; v < 10; ++v) CHECK(c.costs[static_cast<std::size_t>(v)] == (v == 3 ? 0.0 : 0.25));
  }
}

TEST_CASE("property: iteration-1 costs are constant on latent decisions") {
  SplitMix64 rng(17);
  FeatureInterner interner;
  for (int trial = 0; trial < 30; ++trial) {
    auto data = random_sequences(rng, 1, 6, 8);
    SequenceTask task(data, {3, 6});
    const std::size_t T = data[0].size();
    RolloutConfig cfg;
    cfg.seed = rng();
    std::vector<int> prefix;
    for (std::size_t t = 1; t <= T; ++t) {
      auto c = estimate_costs(task, 0, t, prefix, Policy::initial(), cfg, interner);
      for (double v : c.costs) CHECK(v == 0.0);
      prefix.push_back(testgen::uniform_int(rng, 3));
    }
    for (std::size_t t = T + 1; t <= 2 * T; ++t) {
      auto c = estimate_costs(task, 0, t, prefix, Policy::initial(), cfg, interner);
      const int truth = data[0].symbols[t - T - 1];
      for (int v = 0; v < 6; ++v) {
        CHECK(c.costs[static_cast<std::size_t>(v)] ==
              doctest::Approx(v == truth ? 0.0 : 1.0 / static_cast<double>(T)).epsilon(1e-15));
      }
      prefix.push_back(truth);
    }
  }
}

TEST_CASE("generate_examples: iteration 1 yields only emit examples") {
  SplitMix64 rng(5);
  auto data = random_sequences(rng, 4, 5, 6);
  SequenceTask task(data, {2, 5});
  FeatureInterner interner;
  RolloutConfig cfg;
  auto ts = generate_examples(task, Policy::initial(), cfg, interner);
  std::size_t total = 0;
  for (const auto& s : data) total += s.size();
  CHECK(ts.choice[SequenceTask::kLatentSlot].empty());
  CHECK(ts.choice[SequenceTask::kEmitSlot].size() == total);
}

TEST_CASE("generate_examples: one example per non-constant decision") {
  // Latent costs are constant under the initial policy; the 3 emit costs are not.
  SequenceTask task({SymbolSequence{{0, 1, 0}}}, {2, 2});
  FeatureInterner interner;
  RolloutConfig cfg;
  auto ts = generate_examples(task, Policy::initial(), cfg, interner);
  CHECK(ts.choice_count() == 3);
}

TEST_CASE("generate_examples is deterministic and thread-count invariant") {
  SplitMix64 rng(8);
  auto data = random_sequences(rng, 6, 4, 7);
  SequenceTask task(data, {3, 4});
  SearnOptions opt;
  opt.beta = 0.5;
  opt.stopping.max_iterations = 2;
  FeatureInterner base;
  auto res = searn_learn(task, opt, base);
  // Mixed policy with learned components.
  Policy mixed = interpolate_policy(Policy::initial(), res.policy.components().back().rule, 0.5);

  RolloutConfig cfg;
  cfg.seed = 1234;
  FeatureInterner i1 = base, i2 = base, i3 = base;
  auto a = generate_examples(task, mixed, cfg, i1);
  auto b = generate_examples(task, mixed, cfg, i2);
  cfg.threads = 3;
  auto c = generate_examples(task, mixed, cfg, i3);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(i1.names() == i3.names());
  CHECK(a.choice[SequenceTask::kLatentSlot].size() > 0);
}

TEST_CASE("tied randomness: repeated estimates are bit-identical") {
  SplitMix64 rng(21);
  auto data = random_sequences(rng, 1, 4, 8);
  SequenceTask task(data, {3, 4});
  SearnOptions opt;
  opt.beta = 0.5;
  opt.stopping.max_iterations = 1;
  FeatureInterner interner;
  auto res = searn_learn(task, opt, interner);
  Policy mixed = interpolate_policy(Policy::initial(), res.policy.components().back().rule, 0.3);
  RolloutConfig cfg;
  cfg.seed = 77;
  cfg.n_samples = 3;
  auto x = estimate_costs(task, 0, 1, {}, mixed, cfg, interner);
  auto y = estimate_costs(task, 0, 1, {}, mixed, cfg, interner);
  CHECK(x.costs == y.costs);
}

TEST_CASE("property: any policy run uses the declared number of decisions") {
  SplitMix64 rng(31);
  auto data = random_sequences(rng, 10, 5, 9);
  SequenceTask task(data, {3, 5});
  SearnOptions opt;
  opt.beta = 0.3;
  opt.stopping.max_iterations = 2;
  FeatureInterner interner;
  auto res = searn_learn(task, opt, interner);
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (const Policy* p : {&res.policy}) {
      auto traj = run_policy(task, n, *p, rng(), interner);
      CHECK(traj.decisions.size() == task.max_decisions(n));
      for (std::size_t t = 0; t < traj.decisions.size(); ++t) {
        const auto& d = traj.decisions[t];
        CHECK(d.action >= 0);
        CHECK(static_cast<std::size_t>(d.action) < d.num_actions);
      }
    }
  }
}

TEST_CASE("searn_learn with beta 1 returns the classifier trained on initial-policy costs") {
  SplitMix64 rng(41);
  auto data = random_sequences(rng, 5, 4, 6);
  SequenceTask task(data, {2, 4});
  SearnOptions opt;
  opt.beta = 1.0;
  opt.stopping.max_iterations = 1;
  opt.rollout.seed = 9;
  FeatureInterner interner;
  auto res = searn_learn(task, opt, interner);
  REQUIRE(res.policy.components().size() == 1);
  CHECK(res.policy.components()[0].weight == 1.0);

  FeatureInterner fresh;
  RolloutConfig cfg = opt.rollout;
  cfg.seed = mix_seed({opt.rollout.seed, 1});
  auto ts = generate_examples(task, Policy::initial(), cfg, fresh);
  auto h = train_rule(task, ts, opt.learner, fresh.size(), 1);
  const auto& got = res.policy.components()[0].rule->slots;
  REQUIRE(got.size() == h->slots.size());
  for (std::size_t s = 0; s < got.size(); ++s) CHECK(got[s] == h->slots[s]);
}

TEST_CASE("searn_learn stops once dev accuracy stalls for `patience` iterations") {
  SplitMix64 rng(51);
  auto train = random_sequences(rng, 6, 4, 6);
  auto dev = random_sequences(rng, 4, 4, 6);
  SequenceTask task(train, {2, 4});
  SequenceTask dev_task(dev, {2, 4});
  SearnOptions opt;
  opt.beta = 0.3;
  opt.stopping.max_iterations = 12;
  opt.stopping.patience = 2;
  opt.stopping.dev = &dev_task;
  FeatureInterner interner;
  auto res = searn_learn(task, opt, interner);
  const auto& h = res.history;
  REQUIRE(!h.empty());
  double best = -1.0;
  std::size_t since = 0;
  std::size_t expect_stop = h.size();
  for (std::size_t i = 0; i < h.size(); ++i) {
    double a = std::isnan(h[i].dev_accuracy) ? 0.0 : h[i].dev_accuracy;
    if (a > best) {
      best = a;
      since = 0;
    } else if (++since >= opt.stopping.patience) {
      expect_stop = i + 1;
      break;
    }
  }
  CHECK(h.size() == expect_stop);
  CHECK(res.best_iteration >= 1);
  CHECK(res.best_iteration <= h.size());
}

TEST_CASE("searn_bound") {
  CHECK(searn_bound(0, 0, 7, 0) == 0.0);
  CHECK(searn_bound(0, 0.1, 10, 1) == doctest::Approx(2 * 0.1 * 10 * std::log(10.0) + (1 + std::log(10.0)) / 10));
  CHECK(searn_bound(0, 0.1, 10, 1) == doctest::Approx(4.935).epsilon(1e-3));
  SplitMix64 rng(2);
  for (int i = 0; i < 100; ++i) {
    double li = rng.uniform(), la = rng.uniform(), c = rng.uniform();
    std::size_t T = 1 + rng() % 50;
    CHECK(searn_bound(li, la, T, c) <= searn_bound(li, la + rng.uniform(), T, c));
  }
  CHECK_THROWS_AS(searn_bound(0, 0, 0, 0), Error);
}

TEST_CASE("feature interner canonicalization orders ids by first appearance") {
  FeatureInterner in;
  in.intern("a");
  auto z = in.intern("z");
  auto y = in.intern("y");
  FeatureVector v1{{{y, 1.0}}}, v2{{{z, 2.0}}};
  FeatureVector* vs[] = {&v1, &v2};
  in.canonicalize(1, vs);
  CHECK(in.name(1) == "y");
  CHECK(in.name(2) == "z");
  CHECK(v1.entries[0].first == 1);
  CHECK(v2.entries[0].first == 2);
}

TEST_CASE("feature builder accumulates repeated names and drops unknown ones read-only") {
  FeatureInterner in;
  FeatureBuilder fb;
  fb.add("w=1", 2.0);
  fb.add("w=1", 1.0);
  fb.add("zero", 0.0);
  auto v = fb.resolve(in, true);
  REQUIRE(v.size() == 1);
  CHECK(v.entries[0].second == 3.0);
  FeatureBuilder other;
  other.add("unseen");
  CHECK(other.resolve(static_cast<const FeatureInterner&>(in)).empty());
}
