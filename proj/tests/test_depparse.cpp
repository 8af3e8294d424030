#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "searn/datagen.hpp"
#include "searn/error.hpp"
#include "searn/searn.hpp"
#include "searn/task_depparse.hpp"

using namespace searn;

namespace {

using Features = std::vector<std::pair<std::string, double>>;

bool has(const Features& f, const std::string& name) {
  return std::any_of(f.begin(), f.end(), [&](const auto& p) { return p.first == name; });
}
bool has_prefix(const Features& f, const std::string& prefix) {
  return std::any_of(f.begin(), f.end(), [&](const auto& p) { return p.first.rfind(prefix, 0) == 0; });
}

ParserState state(std::vector<int> stack, int i, std::vector<int> heads) {
  ParserState s;
  s.stack = std::move(stack);
  s.i = i;
  s.heads = std::move(heads);
  return s;
}

std::vector<int> oracle_actions(const DependencyTree& gold) {
  auto s = ParserState::initial(gold.size());
  std::vector<int> out;
  while (!s.is_final()) {
    int a = supervised_oracle(s, gold);
    out.push_back(a);
    s = apply_action(s, a);
  }
  return out;
}

}  // namespace

TEST_CASE("legal_actions") {
  CHECK(legal_actions(ParserState::initial(3)) == std::vector<int>{kShift});
  CHECK(legal_actions(state({1}, 2, {0, -1, -1})) == std::vector<int>{kLeftArc, kRightArc, kShift});
  auto s = state({1}, 2, {0, -1, 1, -1});
  CHECK(is_legal(s, kReduce) == false);  // token 1 still headless
  auto r = state({1}, 3, {0, 2, -1, -1});
  CHECK(is_legal(r, kReduce));
  CHECK_FALSE(is_legal(r, kLeftArc));
  CHECK_FALSE(is_legal(r, 7));
}

TEST_CASE("apply_action") {
  auto s0 = ParserState::initial(3);
  auto s1 = apply_action(s0, kShift);
  CHECK(s1 == state({1}, 2, {0, -1, -1, -1}));
  CHECK(apply_action(s1, kRightArc) == state({1, 2}, 3, {0, -1, 1, -1}));
  CHECK(apply_action(s1, kLeftArc) == state({}, 2, {0, 2, -1, -1}));
  CHECK_THROWS_AS(apply_action(s0, kReduce), Error);
  CHECK_THROWS_AS(apply_action(s0, kLeftArc), Error);
  try {
    apply_action(s0, kRightArc);
    FAIL("expected a state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::state);
    CHECK(std::string(e.what()).find("stack is empty") != std::string::npos);
  }
}

TEST_CASE("finalize") {
  CHECK(tree_from_actions(1, std::vector<int>{kShift}).heads == std::vector<int>{0});
  CHECK(tree_from_actions(2, std::vector<int>{kShift, kRightArc}).heads == std::vector<int>{0, 1});
  CHECK_THROWS_AS(finalize(ParserState::initial(2)), Error);
}

TEST_CASE("property: random legal parses terminate within 2T with single heads and valid trees") {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t T = 1 + rng() % 10;
    auto s = ParserState::initial(T);
    std::size_t steps = 0;
    std::vector<int> headed_before(T + 1, -1);
    while (!s.is_final()) {
      REQUIRE(steps < 2 * T);
      auto legal = legal_actions(s);
      REQUIRE(!legal.empty());
      auto prev = s;
      s = apply_action(s, legal[rng() % legal.size()]);
      ++steps;
      // Heads are assigned once and never change.
      for (std::size_t d = 1; d <= T; ++d) {
        if (prev.heads[d] >= 0) CHECK(s.heads[d] == prev.heads[d]);
      }
    }
    auto tree = finalize(s);
    CHECK(is_valid_tree(tree));
    CHECK(is_projective(tree));
  }
}

TEST_CASE("supervised_oracle") {
  auto s = state({1}, 2, {0, -1, -1});
  CHECK(supervised_oracle(s, DependencyTree{{0, 1}}) == kRightArc);
  CHECK(supervised_oracle(s, DependencyTree{{2, 0}}) == kLeftArc);
}

TEST_CASE("property: the oracle reproduces random projective trees") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t T = 1 + rng() % 12;
    auto gold = testgen::random_projective_tree(rng, T);
    auto pred = tree_from_actions(T, oracle_actions(gold));
    CHECK(arc_accuracy(pred, gold) == 1.0);
  }
}

TEST_CASE("tree_features") {
  const int tags[] = {5, 6, 7, 8};
  auto f0 = tree_features(ParserState::initial(4), tags);
  CHECK(has(f0, "stack=null"));
  CHECK(has(f0, "i0=5"));
  CHECK(has(f0, "i-1=<s>"));
  CHECK_FALSE(has_prefix(f0, "dist="));
  CHECK_FALSE(has_prefix(f0, "t0="));

  auto s1 = apply_action(ParserState::initial(4), kShift);
  auto f1 = tree_features(s1, tags);
  CHECK(has(f1, "dist=1"));
  CHECK(has(f1, "pair=5,6"));

  auto s2 = apply_action(s1, kRightArc);  // 2 <- 1, stack top is 2
  auto f2 = tree_features(s2, tags);
  CHECK(has(f2, "t_head=5"));
  auto s3 = apply_action(apply_action(ParserState::initial(4), kShift), kLeftArc);  // 1 <- 2
  CHECK(has(tree_features(s3, tags), "i_dep=5"));
}

TEST_CASE("word_features") {
  const int tags[] = {3, 4, 9};
  DependencyTree tree{{0, 1, 1}};
  auto root_child = word_features(tree, tags, 1);
  CHECK(has(root_child, "parent=ROOT"));
  CHECK_FALSE(has_prefix(root_child, "grand="));
  CHECK(has(root_child, "daughter=4"));
  auto inner = word_features(tree, tags, 2);
  CHECK(has(inner, "parent=3"));
  CHECK(has(inner, "grand=ROOT"));
}

TEST_CASE("arc_accuracy") {
  CHECK(arc_accuracy(DependencyTree{{0, 1}}, DependencyTree{{0, 1}}) == 1.0);
  CHECK(arc_accuracy(DependencyTree{{0, 0}}, DependencyTree{{0, 1}}) == 0.5);
  SplitMix64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto t = testgen::random_projective_tree(rng, 1 + rng() % 10);
    CHECK(arc_accuracy(t, t) == 1.0);
  }
}

TEST_CASE("depparse decomposition") {
  SplitMix64 rng(4);
  auto tags = testgen::random_tags(rng, 7, 12);
  TaggedSentence unlabeled{tags, std::nullopt};
  DepParseTask task({unlabeled}, {12, Supervision::unsup});
  FeatureInterner interner;
  for (int r = 0; r < 50; ++r) {
    auto traj = run_policy(task, 0, Policy::initial(), rng(), interner, true);
    std::size_t phase1 = 0;
    for (const auto& d : traj.decisions) phase1 += d.slot == DepParseTask::kTreeSlot ? 1 : 0;
    CHECK(phase1 <= 14);
    CHECK(traj.decisions.size() == phase1 + 7);
    // The initial policy reproduces the tags, so the unlabeled loss is 0
    // whatever tree was built, and no gold tree is needed.
    CHECK(traj.loss == 0.0);
  }
}

TEST_CASE("labeled sentences follow the oracle and score arcs") {
  SplitMix64 rng(5);
  auto gold = testgen::random_projective_tree(rng, 6);
  TaggedSentence s{testgen::random_tags(rng, 6, 12), gold};
  DepParseTask task({s}, {12, Supervision::sup});
  FeatureInterner interner;
  auto traj = run_policy(task, 0, Policy::initial(), 1, interner);
  CHECK(traj.loss == 0.0);
  for (const auto& d : traj.decisions) CHECK(d.slot == DepParseTask::kTreeSlot);

  TaggedSentence no_gold{s.tags, std::nullopt};
  CHECK_THROWS_AS(DepParseTask({no_gold}, {12, Supervision::sup}), Error);
  TaggedSentence crossing{{1, 2, 3, 4}, DependencyTree{{3, 4, 0, 3}}};
  CHECK_THROWS_AS(DepParseTask({crossing}, {12, Supervision::sup}), Error);
}

TEST_CASE("semi-supervised task mixes both losses") {
  SplitMix64 rng(6);
  std::vector<TaggedSentence> sents;
  for (int i = 0; i < 4; ++i) {
    auto T = 2 + rng() % 6;
    sents.push_back({testgen::random_tags(rng, T, 12), testgen::random_projective_tree(rng, T)});
  }
  sents[2].gold.reset();
  sents[3].gold.reset();
  DepParseTask task(sents, {12, Supervision::semi});
  CHECK(task.labeled(0));
  CHECK(task.labeled(1));
  CHECK_FALSE(task.labeled(2));
  CHECK_FALSE(task.labeled(3));
}
