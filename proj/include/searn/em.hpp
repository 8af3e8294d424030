#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "searn/data.hpp"
#include "searn/table.hpp"

namespace searn {

// Mixture of multinomials: cluster priors rho and per-cluster word
// distributions theta (K x V).
struct MultinomialMixtureParams {
  std::vector<double> rho;
  Table theta;

  std::size_t num_clusters() const { return rho.size(); }
  std::size_t vocab_size() const { return theta.cols; }
  bool operator==(const MultinomialMixtureParams&) const = default;
};

// N x K posterior cluster memberships.
using Responsibilities = Table;

Responsibilities mm_e_step(const MultinomialMixtureParams& params,
                           std::span<const DocumentCounts> docs);

MultinomialMixtureParams mm_m_step(const Responsibilities& z,
                                   std::span<const DocumentCounts> docs, std::size_t vocab_size,
                                   double smoothing = 0.0);

// Incomplete-data log-likelihood without the multinomial coefficient.
double mm_log_likelihood(const MultinomialMixtureParams& params,
                         std::span<const DocumentCounts> docs);

MultinomialMixtureParams mm_random_init(std::size_t K, std::size_t V, std::uint64_t seed);

// Parameters after each of `iterations` EM iterations from `init`.
std::vector<MultinomialMixtureParams> mm_em_train(std::span<const DocumentCounts> docs,
                                                  const MultinomialMixtureParams& init,
                                                  std::size_t iterations);

// ---------------------------------------------------------------------------
// First-order HMM

struct HmmParams {
  std::vector<double> initial;  // K
  Table transition;             // K x K, row = previous state
  Table emission;               // K x V

  std::size_t num_states() const { return initial.size(); }
  std::size_t vocab_size() const { return emission.cols; }
  bool operator==(const HmmParams&) const = default;
};

struct ForwardBackward {
  Table log_alpha;  // T x K
  Table log_beta;   // T x K
  double log_likelihood = 0.0;
};

ForwardBackward hmm_forward_backward(const HmmParams& params, std::span<const int> x);
double hmm_log_likelihood(const HmmParams& params, std::span<const int> x);

HmmParams hmm_random_init(std::size_t K, std::size_t V, std::uint64_t seed);

struct HmmTrainResult {
  HmmParams params;
  std::vector<double> log_likelihood;  // corpus log-likelihood before each M-step
  std::size_t iterations = 0;
};

// Baum-Welch from a random start. Stops after `max_iterations` M-steps or
// once the log-likelihood improves by less than `tolerance`.
HmmTrainResult hmm_em_train(std::span<const SymbolSequence> data, std::size_t K, std::size_t V,
                            std::size_t max_iterations, std::uint64_t seed,
                            double tolerance = 1e-5);

// Viterbi path; ties go to the lower state id.
std::vector<int> hmm_decode(const HmmParams& params, std::span<const int> x);
// Per-position argmax of the state posterior.
std::vector<int> hmm_posterior_decode(const HmmParams& params, std::span<const int> x);

}  // namespace searn
