#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "searn/data.hpp"
#include "searn/em.hpp"
#include "searn/rng.hpp"
#include "searn/task_depparse.hpp"

namespace testgen {

inline int uniform_int(searn::SplitMix64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

inline std::vector<double> simplex(searn::SplitMix64& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = 0.05 + rng.uniform();
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline searn::DocumentCounts random_doc(searn::SplitMix64& rng, std::size_t V, int max_count = 4) {
  std::vector<int> dense(V);
  int total = 0;
  for (auto& c : dense) {
    c = uniform_int(rng, max_count + 1);
    total += c;
  }
  if (total == 0) dense[0] = 1;
  return searn::DocumentCounts::from_dense(dense);
}

inline std::vector<searn::DocumentCounts> random_docs(searn::SplitMix64& rng, std::size_t n,
                                                      std::size_t V) {
  std::vector<searn::DocumentCounts> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back(random_doc(rng, V));
  return docs;
}

inline searn::MultinomialMixtureParams random_mixture(searn::SplitMix64& rng, std::size_t K,
                                                      std::size_t V) {
  searn::MultinomialMixtureParams p;
  p.rho = simplex(rng, K);
  p.theta = searn::Table(K, V, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    auto row = simplex(rng, V);
    for (std::size_t v = 0; v < V; ++v) p.theta(k, v) = row[v];
  }
  return p;
}

inline searn::HmmParams random_hmm(searn::SplitMix64& rng, std::size_t K, std::size_t V) {
  searn::HmmParams p;
  p.initial = simplex(rng, K);
  p.transition = searn::Table(K, K, 0.0);
  p.emission = searn::Table(K, V, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    auto t = simplex(rng, K);
    auto e = simplex(rng, V);
    for (std::size_t j = 0; j < K; ++j) p.transition(k, j) = t[j];
    for (std::size_t v = 0; v < V; ++v) p.emission(k, v) = e[v];
  }
  return p;
}

// Uniformly random legal arc-eager run; returns the actions taken.
inline std::vector<int> random_parse(searn::SplitMix64& rng, std::size_t T) {
  auto s = searn::ParserState::initial(T);
  std::vector<int> actions;
  while (!s.is_final()) {
    auto legal = searn::legal_actions(s);
    int a = legal[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(legal.size())))];
    actions.push_back(a);
    s = searn::apply_action(s, a);
  }
  return actions;
}

// Random projective tree: the result of a random legal parse.
inline searn::DependencyTree random_projective_tree(searn::SplitMix64& rng, std::size_t T) {
  return searn::tree_from_actions(T, random_parse(rng, T));
}

inline std::vector<int> random_tags(searn::SplitMix64& rng, std::size_t T, int tagset) {
  std::vector<int> tags(T);
  for (auto& t : tags) t = uniform_int(rng, tagset);
  return tags;
}

}  // namespace testgen
