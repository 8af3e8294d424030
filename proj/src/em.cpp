#include "searn/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "searn/error.hpp"

namespace searn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// log rho_k + sum_v d_v log theta_kv, with 0 * log 0 = 0.
double log_joint(const MultinomialMixtureParams& params, std::size_t k, const DocumentCounts& doc) {
  double s = safe_log(params.rho[k]);
  for (const auto& [v, c] : doc.counts) {
    require(v >= 0 && static_cast<std::size_t>(v) < params.vocab_size(), ErrorKind::data,
            "word id " + std::to_string(v) + " outside the vocabulary");
    double p = params.theta(k, static_cast<std::size_t>(v));
    if (p <= 0.0) return kNegInf;
    s += c * std::log(p);
  }
  return s;
}

std::vector<double> normalized_uniform(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = unif(rng);
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

void normalize(std::span<double> v, std::span<const double> fallback) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0) {
    for (double& x : v) x /= total;
  } else {
    std::copy(fallback.begin(), fallback.end(), v.begin());
  }
}

}  // namespace

Responsibilities mm_e_step(const MultinomialMixtureParams& params,
                           std::span<const DocumentCounts> docs) {
  const std::size_t K = params.num_clusters();
  Responsibilities z(docs.size(), K);
  std::vector<double> lj(K);
  for (std::size_t n = 0; n < docs.size(); ++n) {
    for (std::size_t k = 0; k < K; ++k) lj[k] = log_joint(params, k, docs[n]);
    double norm = log_sum_exp(lj);
    if (norm == kNegInf) {
      fail(ErrorKind::data,
           "document " + std::to_string(n) + " has zero likelihood under every cluster");
    }
    for (std::size_t k = 0; k < K; ++k) z(n, k) = std::exp(lj[k] - norm);
  }
  return z;
}

MultinomialMixtureParams mm_m_step(const Responsibilities& z,
                                   std::span<const DocumentCounts> docs, std::size_t vocab_size,
                                   double smoothing) {
  require(z.rows == docs.size(), ErrorKind::parameter,
          "responsibilities and documents differ in count");
  const std::size_t K = z.cols;
  MultinomialMixtureParams p;
  p.rho.assign(K, 0.0);
  p.theta = Table(K, vocab_size, 0.0);
  for (std::size_t n = 0; n < docs.size(); ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double w = z(n, k);
      p.rho[k] += w;
      for (const auto& [v, c] : docs[n].counts) {
        require(v >= 0 && static_cast<std::size_t>(v) < vocab_size, ErrorKind::data,
                "word id outside the vocabulary");
        p.theta(k, static_cast<std::size_t>(v)) += w * c;
      }
    }
  }
  double rho_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (p.rho[k] <= 0.0 && smoothing == 0.0) {
      fail(ErrorKind::parameter,
           "cluster " + std::to_string(k) + " has zero total responsibility");
    }
    p.rho[k] += smoothing;
    rho_total += p.rho[k];
  }
  for (auto& r : p.rho) r /= rho_total;
  for (std::size_t k = 0; k < K; ++k) {
    auto row = p.theta.row(k);
    double total = 0.0;
    for (double& x : row) {
      x += smoothing;
      total += x;
    }
    for (double& x : row) x = total > 0.0 ? x / total : 1.0 / static_cast<double>(vocab_size);
  }
  return p;
}

double mm_log_likelihood(const MultinomialMixtureParams& params,
                         std::span<const DocumentCounts> docs) {
  const std::size_t K = params.num_clusters();
  std::vector<double> lj(K);
  double total = 0.0;
  for (const auto& doc : docs) {
    for (std::size_t k = 0; k < K; ++k) lj[k] = log_joint(params, k, doc);
    total += log_sum_exp(lj);
  }
  return total;
}

MultinomialMixtureParams mm_random_init(std::size_t K, std::size_t V, std::uint64_t seed) {
  require(K >= 1 && V >= 1, ErrorKind::parameter, "K and V must be positive");
  std::mt19937_64 rng(seed);
  MultinomialMixtureParams p;
  p.rho = normalized_uniform(K, rng);
  p.theta = Table(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    auto row = normalized_uniform(V, rng);
    std::copy(row.begin(), row.end(), p.theta.row(k).begin());
  }
  return p;
}

std::vector<MultinomialMixtureParams> mm_em_train(std::span<const DocumentCounts> docs,
                                                  const MultinomialMixtureParams& init,
                                                  std::size_t iterations) {
  std::vector<MultinomialMixtureParams> trajectory;
  MultinomialMixtureParams cur = init;
  for (std::size_t it = 0; it < iterations; ++it) {
    cur = mm_m_step(mm_e_step(cur, docs), docs, cur.vocab_size());
    trajectory.push_back(cur);
  }
  return trajectory;
}

// ---------------------------------------------------------------------------

namespace {

struct LogParams {
  std::vector<double> initial;
  Table transition;
  Table emission;
};

LogParams to_log(const HmmParams& p) {
  LogParams lp{p.initial, p.transition, p.emission};
  for (auto& x : lp.initial) x = safe_log(x);
  for (auto& x : lp.transition.data) x = safe_log(x);
  for (auto& x : lp.emission.data) x = safe_log(x);
  return lp;
}

void check_symbols(const HmmParams& params, std::span<const int> x) {
  for (int s : x) {
    require(s >= 0 && static_cast<std::size_t>(s) < params.vocab_size(), ErrorKind::data,
            "symbol " + std::to_string(s) + " outside the vocabulary");
  }
}

ForwardBackward forward_backward(const LogParams& lp, std::size_t K, std::span<const int> x) {
  const std::size_t T = x.size();
  ForwardBackward fb;
  fb.log_alpha = Table(T, K, kNegInf);
  fb.log_beta = Table(T, K, 0.0);
  if (T == 0) return fb;
  std::vector<double> buf(K);
  for (std::size_t k = 0; k < K; ++k) {
    fb.log_alpha(0, k) = lp.initial[k] + lp.emission(k, static_cast<std::size_t>(x[0]));
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < K; ++j) buf[j] = fb.log_alpha(t - 1, j) + lp.transition(j, k);
      fb.log_alpha(t, k) = log_sum_exp(buf) + lp.emission(k, static_cast<std::size_t>(x[t]));
    }
  }
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        buf[k] = lp.transition(j, k) + lp.emission(k, static_cast<std::size_t>(x[t + 1])) +
                 fb.log_beta(t + 1, k);
      }
      fb.log_beta(t, j) = log_sum_exp(buf);
    }
  }
  fb.log_likelihood = log_sum_exp(fb.log_alpha.row(T - 1));
  return fb;
}

}  // namespace

ForwardBackward hmm_forward_backward(const HmmParams& params, std::span<const int> x) {
  check_symbols(params, x);
  return forward_backward(to_log(params), params.num_states(), x);
}

double hmm_log_likelihood(const HmmParams& params, std::span<const int> x) {
  return hmm_forward_backward(params, x).log_likelihood;
}

HmmParams hmm_random_init(std::size_t K, std::size_t V, std::uint64_t seed) {
  require(K >= 1 && V >= 1, ErrorKind::parameter, "K and V must be positive");
  std::mt19937_64 rng(seed);
  HmmParams p;
  p.initial = normalized_uniform(K, rng);
  p.transition = Table(K, K);
  for (std::size_t j = 0; j < K; ++j) {
    auto row = normalized_uniform(K, rng);
    std::copy(row.begin(), row.end(), p.transition.row(j).begin());
  }
  p.emission = Table(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    auto row = normalized_uniform(V, rng);
    std::copy(row.begin(), row.end(), p.emission.row(k).begin());
  }
  return p;
}

HmmTrainResult hmm_em_train(std::span<const SymbolSequence> data, std::size_t K, std::size_t V,
                            std::size_t max_iterations, std::uint64_t seed, double tolerance) {
  require(!data.empty(), ErrorKind::data, "cannot train an HMM on an empty dataset");
  require(K >= 1 && V >= 1, ErrorKind::parameter, "K and V must be positive");

  HmmTrainResult result;
  result.params = hmm_random_init(K, V, seed);
  for (const auto& seq : data) check_symbols(result.params, seq.symbols);

  for (std::size_t it = 0; it <= max_iterations; ++it) {
    const LogParams lp = to_log(result.params);
    std::vector<double> init_counts(K, 0.0);
    Table trans_counts(K, K, 0.0);
    Table emit_counts(K, V, 0.0);
    double ll = 0.0;

    for (const auto& seq : data) {
      const auto& x = seq.symbols;
      if (x.empty()) continue;
      ForwardBackward fb = forward_backward(lp, K, x);
      const double z = fb.log_likelihood;
      ll += z;
      for (std::size_t t = 0; t < x.size(); ++t) {
        for (std::size_t k = 0; k < K; ++k) {
          double g = std::exp(fb.log_alpha(t, k) + fb.log_beta(t, k) - z);
          if (t == 0) init_counts[k] += g;
          emit_counts(k, static_cast<std::size_t>(x[t])) += g;
        }
        if (t + 1 == x.size()) continue;
        for (std::size_t j = 0; j < K; ++j) {
          for (std::size_t k = 0; k < K; ++k) {
            trans_counts(j, k) += std::exp(fb.log_alpha(t, j) + lp.transition(j, k) +
                                           lp.emission(k, static_cast<std::size_t>(x[t + 1])) +
                                           fb.log_beta(t + 1, k) - z);
          }
        }
      }
    }

    if (!result.log_likelihood.empty() && ll - result.log_likelihood.back() < tolerance) {
      result.log_likelihood.push_back(ll);
      break;
    }
    result.log_likelihood.push_back(ll);
    if (it == max_iterations) break;

    HmmParams next = result.params;
    next.initial = init_counts;
    normalize(next.initial, result.params.initial);
    next.transition = trans_counts;
    for (std::size_t j = 0; j < K; ++j) normalize(next.transition.row(j), result.params.transition.row(j));
    next.emission = emit_counts;
    for (std::size_t k = 0; k < K; ++k) normalize(next.emission.row(k), result.params.emission.row(k));
    result.params = std::move(next);
    result.iterations = it + 1;
  }
  return result;
}

std::vector<int> hmm_decode(const HmmParams& params, std::span<const int> x) {
  check_symbols(params, x);
  const std::size_t K = params.num_states();
  const std::size_t T = x.size();
  if (T == 0) return {};
  const LogParams lp = to_log(params);
  Table delta(T, K, kNegInf);
  std::vector<std::vector<int>> back(T, std::vector<int>(K, 0));
  for (std::size_t k = 0; k < K; ++k) {
    delta(0, k) = lp.initial[k] + lp.emission(k, static_cast<std::size_t>(x[0]));
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t j = 0; j < K; ++j) {
        double s = delta(t - 1, j) + lp.transition(j, k);
        if (s > best) {
          best = s;
          arg = static_cast<int>(j);
        }
      }
      delta(t, k) = best + lp.emission(k, static_cast<std::size_t>(x[t]));
      back[t][k] = arg;
    }
  }
  std::vector<int> path(T, 0);
  double best = kNegInf;
  for (std::size_t k = 0; k < K; ++k) {
    if (delta(T - 1, k) > best) {
      best = delta(T - 1, k);
      path[T - 1] = static_cast<int>(k);
    }
  }
  for (std::size_t t = T - 1; t > 0; --t) {
    path[t - 1] = back[t][static_cast<std::size_t>(path[t])];
  }
  return path;
}

std::vector<int> hmm_posterior_decode(const HmmParams& params, std::span<const int> x) {
  ForwardBackward fb = hmm_forward_backward(params, x);
  std::vector<int> out(x.size(), 0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double best = kNegInf;
    for (std::size_t k = 0; k < params.num_states(); ++k) {
      double s = fb.log_alpha(t, k) + fb.log_beta(t, k);
      if (s > best) {
        best = s;
        out[t] = static_cast<int>(k);
      }
    }
  }
  return out;
}

}  // namespace searn
