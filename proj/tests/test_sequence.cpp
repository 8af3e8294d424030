#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "searn/error.hpp"
#include "searn/searn.hpp"
#include "searn/task_sequence.hpp"

using namespace searn;

namespace {

using Features = std::vector<std::pair<std::string, double>>;

bool has(const Features& f, const std::string& name) {
  return std::any_of(f.begin(), f.end(), [&](const auto& p) { return p.first == name; });
}

SymbolSequence random_sequence(SplitMix64& rng, std::size_t T, int V) {
  SymbolSequence s;
  for (std::size_t t = 0; t < T; ++t) s.symbols.push_back(testgen::uniform_int(rng, V));
  return s;
}

}  // namespace

TEST_CASE("sequence decomposition") {
  SplitMix64 rng(1);
  SequenceTask task({random_sequence(rng, 5, 4)}, {3, 4});
  CHECK(task.max_decisions(0) == 10);
  FeatureInterner interner;
  auto traj = run_policy(task, 0, Policy::initial(), 3, interner);
  REQUIRE(traj.decisions.size() == 10);
  for (std::size_t t = 0; t < 5; ++t) CHECK(traj.decisions[t].num_actions == 3);
  for (std::size_t t = 5; t < 10; ++t) CHECK(traj.decisions[t].num_actions == 4);
  CHECK(traj.loss == 0.0);
}

TEST_CASE("seq_features") {
  const int x[] = {4, 2, 7};
  const int labels[] = {3, 0, 1};
  SequenceTaskConfig nb{4, 10, SequenceFeatures::nb_hmm};
  auto emit = seq_features(x, labels, 4, nb);
  CHECK(emit == Features{{"emit_label=3", 1.0}});
  for (std::size_t t = 4; t <= 6; ++t) {
    for (const auto& [name, v] : seq_features(x, labels, t, nb)) CHECK(name.rfind("x", 0) != 0);
  }

  SequenceTaskConfig lr{4, 10, SequenceFeatures::lr_window};
  auto first = seq_features(x, {}, 1, lr);
  CHECK(has(first, "x-1=BOS"));
  CHECK(has(first, "x0=4"));
  CHECK(has(first, "x+1=2"));
  CHECK(has(first, "prev=BOS"));
  auto last = seq_features(x, labels, 3, lr);
  CHECK(has(last, "x+1=EOS"));
  CHECK(has(last, "prev=0"));

  SequenceTaskConfig wide{4, 10, SequenceFeatures::nb_hmm, true};
  auto w = seq_features(x, labels, 5, wide);
  CHECK(has(w, "emit_label=0"));
  CHECK(has(w, "emit_prev=3"));
  CHECK(has(w, "emit_next=1"));

  CHECK_THROWS_AS(seq_features(x, labels, 7, nb), Error);
}

TEST_CASE("seq_loss") {
  const int x[] = {1, 2, 3, 4};
  const int same[] = {1, 2, 3, 4};
  const int wrong[] = {0, 0, 0, 0};
  const int half[] = {1, 0, 3, 0};
  CHECK(seq_loss(x, same) == 0.0);
  CHECK(seq_loss(x, wrong) == 1.0);
  CHECK(seq_loss(x, half) == 0.5);
  const int short_[] = {1};
  CHECK_THROWS_AS(seq_loss(x, short_), Error);
}

TEST_CASE("property: loss is unchanged by permuting the latent half") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 1 + rng() % 8;
    auto x = random_sequence(rng, T, 5);
    SequenceTask task({x}, {3, 5});
    FeatureInterner interner;
    RolloutConfig cfg;
    std::vector<int> prefix(T);
    for (auto& p : prefix) p = testgen::uniform_int(rng, 3);
    auto a = estimate_costs(task, 0, T + 1, prefix, Policy::initial(), cfg, interner);
    for (auto& p : prefix) p = (p + 1) % 3;
    auto b = estimate_costs(task, 0, T + 1, prefix, Policy::initial(), cfg, interner);
    CHECK(a.costs == b.costs);
  }
}

TEST_CASE("property: relabeling latent classes of an NB policy leaves rollout losses unchanged") {
  SplitMix64 rng(3);
  const std::size_t K = 3, V = 5;
  std::vector<std::string> names = {"bias", "prev=BOS"};
  for (std::size_t k = 0; k < K; ++k) names.push_back("prev=" + std::to_string(k));
  for (std::size_t v = 0; v < V; ++v) names.push_back("x0=" + std::to_string(v));
  for (std::size_t k = 0; k < K; ++k) names.push_back("emit_label=" + std::to_string(k));
  FeatureInterner interner;
  for (const auto& n : names) interner.intern(n);
  const std::size_t F = names.size();

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> perm = {0, 1, 2};
    for (std::size_t i = 2; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
    auto rename = [&](const std::string& n) {
      for (const std::string prefix : {"prev=", "emit_label="}) {
        if (n.rfind(prefix, 0) == 0 && n != "prev=BOS") {
          return prefix + std::to_string(perm[static_cast<std::size_t>(std::stoi(n.substr(prefix.size())))]);
        }
      }
      return n;
    };

    NBModel latent, emit;
    latent.class_log_prior.resize(K);
    for (auto& p : latent.class_log_prior) p = std::log(0.1 + rng.uniform());
    latent.feature_log_prob = Table(K, F);
    for (auto& w : latent.feature_log_prob.data) w = std::log(0.05 + rng.uniform());
    emit.class_log_prior.resize(V);
    for (auto& p : emit.class_log_prior) p = std::log(0.1 + rng.uniform());
    emit.feature_log_prob = Table(V, F);
    for (auto& w : emit.feature_log_prob.data) w = std::log(0.05 + rng.uniform());

    NBModel latent_p = latent, emit_p = emit;
    for (std::size_t k = 0; k < K; ++k) latent_p.class_log_prior[static_cast<std::size_t>(perm[k])] = latent.class_log_prior[k];
    for (std::size_t j = 0; j < F; ++j) {
      auto jp = *interner.find(rename(names[j]));
      for (std::size_t k = 0; k < K; ++k) {
        latent_p.feature_log_prob(static_cast<std::size_t>(perm[k]), jp) = latent.feature_log_prob(k, j);
      }
      for (std::size_t v = 0; v < V; ++v) emit_p.feature_log_prob(v, jp) = emit.feature_log_prob(v, j);
    }
    auto rule = std::make_shared<LearnedRule>(LearnedRule{{latent, emit}, 1});
    auto rule_p = std::make_shared<LearnedRule>(LearnedRule{{latent_p, emit_p}, 1});

    SequenceTask task({random_sequence(rng, 2 + rng() % 8, static_cast<int>(V))}, {K, V});
    auto a = run_policy(task, 0, Policy::single(rule), 1, interner);
    auto b = run_policy(task, 0, Policy::single(rule_p), 1, interner);
    CHECK(a.loss == b.loss);
    const std::size_t T = task.data()[0].size();
    for (std::size_t t = 0; t < T; ++t) CHECK(b.decisions[t].action == perm[static_cast<std::size_t>(a.decisions[t].action)]);
  }
}

TEST_CASE("property: complete rollouts produce well-formed structures") {
  SplitMix64 rng(4);
  std::vector<SymbolSequence> data;
  for (int i = 0; i < 8; ++i) data.push_back(random_sequence(rng, 1 + rng() % 10, 6));
  SequenceTask task(data, {4, 6, SequenceFeatures::lr_window});
  SearnOptions opt;
  opt.beta = 0.5;
  opt.learner.kind = LearnerKind::logistic;
  opt.stopping.max_iterations = 2;
  FeatureInterner interner;
  auto res = searn_learn(task, opt, interner);
  for (std::size_t n = 0; n < data.size(); ++n) {
    auto traj = run_policy(task, n, res.policy, rng(), interner, false);
    const std::size_t T = data[n].size();
    REQUIRE(traj.decisions.size() == 2 * T);
    std::vector<int> recon;
    for (std::size_t t = 0; t < 2 * T; ++t) {
      const auto& d = traj.decisions[t];
      CHECK(std::find(d.legal.begin(), d.legal.end(), d.action) != d.legal.end());
      if (t >= T) recon.push_back(d.action);
    }
    CHECK(traj.loss == seq_loss(data[n].symbols, recon));
  }
}

TEST_CASE("sequence task rejects bad input") {
  CHECK_THROWS_AS(SequenceTask({SymbolSequence{{}}}, {2, 3}), Error);
  CHECK_THROWS_AS(SequenceTask({SymbolSequence{{5}}}, {2, 3}), Error);
  CHECK_THROWS_AS(SequenceTask({SymbolSequence{{1}}}, {0, 3}), Error);
}
