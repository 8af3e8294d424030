#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "searn/classifiers.hpp"
#include "searn/datagen.hpp"
#include "searn/em.hpp"
#include "searn/eval.hpp"
#include "searn/experiment.hpp"
#include "searn/rng.hpp"
#include "searn/task_cluster.hpp"
#include "searn/task_depparse.hpp"

using namespace searn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 1. EM and exact-mode SEARN agree per iteration.
Outcome equivalence() {
  double worst = 0.0;
  std::size_t failures = 0;
  for (std::size_t K : {2u, 3u}) {
    for (std::uint64_t r = 0; r < 20; ++r) {
      MixtureGenConfig g{K, 5, 10, 20.0, mix_seed({1, K, r})};
      std::vector<DocumentCounts> docs;
      for (auto& d : gen_documents(g)) docs.push_back(d.doc);
      auto init = mm_random_init(K, 5, mix_seed({2, K, r}));
      auto rep = run_equivalence(docs, K, 5, 10, init, init, 1e-8);
      for (double d : rep.max_abs_diff) worst = std::max(worst, d);
      failures += rep.passed && rep.max_abs_diff.size() == 10 ? 0 : 1;
    }
  }
  return {failures == 0 && worst < 1e-8,
          "40 corpora, max |diff| " + fmt("%.3g", worst) + ", failures " + std::to_string(failures)};
}

std::vector<LabeledSequence> hmm_data(int order, std::size_t K, std::uint64_t seed) {
  HmmGenConfig g{order, K, 10, 5, 40.0, seed};
  return gen_hmm_dataset(gen_hmm_params(g), g);
}

SequenceLearnerConfig learner(Method m, std::size_t K, std::uint64_t seed) {
  SequenceLearnerConfig c;
  c.method = m;
  c.K = K;
  c.seed = seed;
  return c;
}

// 2. HMM1, K=2: EM band and SEARN-NB closeness.
Outcome hmm1_table() {
  std::vector<double> em, nb;
  for (std::uint64_t r = 0; r < 10; ++r) {
    auto data = hmm_data(1, 2, mix_seed({11, r}));
    em.push_back(sequence_error(data, 10, learner(Method::em, 2, mix_seed({12, r}))));
    nb.push_back(sequence_error(data, 10, learner(Method::searn_nb, 2, mix_seed({12, r}))));
  }
  const double e = mean(em), n = mean(nb);
  const bool band = e >= 0.15 && e <= 0.40;
  const bool close = std::abs(n - e) <= 0.08;
  return {band && close, "EM mean " + fmt("%.4f", e) + (band ? " in" : " outside") +
                             " [0.15, 0.40], SEARN-NB mean " + fmt("%.4f", n) + ", |diff| " +
                             fmt("%.4f", std::abs(n - e)) + (close ? " <= 0.08" : " > 0.08")};
}

// 3. HMM2: SEARN-LR below EM and SEARN-NB for each K.
Outcome hmm2_direction() {
  bool pass = true;
  std::string detail;
  for (std::size_t K : {2u, 5u}) {
    std::vector<double> em, nb, lr;
    for (std::uint64_t master = 1; master <= 3; ++master) {
      for (std::uint64_t r = 0; r < 10; ++r) {
        auto data = hmm_data(2, K, mix_seed({master, 2, K, r}));
        const auto seed = mix_seed({master, r, 13});
        em.push_back(sequence_error(data, 10, learner(Method::em, K, seed)));
        nb.push_back(sequence_error(data, 10, learner(Method::searn_nb, K, seed)));
        lr.push_back(sequence_error(data, 10, learner(Method::searn_lr, K, seed)));
      }
    }
    const bool ok = mean(lr) < mean(em) && mean(lr) < mean(nb);
    pass = pass && ok;
    detail += "K=" + std::to_string(K) + " EM " + fmt("%.4f", mean(em)) + " NB " +
              fmt("%.4f", mean(nb)) + " LR " + fmt("%.4f", mean(lr)) + (ok ? " ok" : " not lowest") +
              (K == 2 ? "; " : "");
  }
  return {pass, detail};
}

// 4. Random legal rollouts through the arc-eager state machine.
Outcome parser_state_machine() {
  SplitMix64 rng(4);
  std::size_t bad = 0;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t T = 1 + rng() % 10;
    auto s = ParserState::initial(T);
    std::size_t steps = 0;
    bool ok = true;
    while (!s.is_final() && steps <= 2 * T) {
      auto legal = legal_actions(s);
      if (legal.empty()) {
        ok = false;
        break;
      }
      auto next = apply_action(s, legal[rng() % legal.size()]);
      ++steps;
      for (std::size_t d = 1; d <= T; ++d) {
        if (s.heads[d] >= 0 && next.heads[d] != s.heads[d]) ok = false;
        if (next.heads[d] == static_cast<int>(d)) ok = false;
      }
      s = std::move(next);
    }
    if (ok && s.is_final() && steps <= 2 * T) {
      auto tree = finalize(s);
      ok = is_valid_tree(tree) && is_projective(tree);
    } else {
      ok = false;
    }
    bad += ok ? 0 : 1;
  }
  return {bad == 0, "10000 sentences, violations " + std::to_string(bad)};
}

// 5. The supervised oracle rebuilds every gold tree.
Outcome oracle_round_trip() {
  auto bank = gen_treebank({12, 10, 1000, 0.6, 5});
  std::size_t wrong = 0;
  for (const auto& sent : bank) {
    auto s = ParserState::initial(sent.size());
    while (!s.is_final()) s = apply_action(s, supervised_oracle(s, *sent.gold));
    wrong += arc_accuracy(finalize(s), *sent.gold) == 1.0 ? 0 : 1;
  }
  return {wrong == 0, "1000 sentences, imperfect " + std::to_string(wrong)};
}

struct Split500 {
  std::vector<TaggedSentence> train, test;
};

Split500 split_bank(std::uint64_t seed) {
  auto bank = gen_treebank({12, 10, 600, 0.6, seed});
  Split500 s;
  s.train.assign(bank.begin(), bank.begin() + 500);
  s.test.assign(bank.begin() + 500, bank.end());
  return s;
}

// 6. Supervised SEARN-LR beats random parsing by 20 points on held-out data.
Outcome supervised_beats_random() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto data = split_bank(mix_seed({6, seed}));
    ParserTrainConfig cfg;
    cfg.method = Method::searn_lr;
    cfg.supervision = Supervision::sup;
    cfg.seed = seed;
    auto model = train_parser(data.train, cfg);
    const double acc = parser_accuracy(model.policy, model.interner, data.test, 12, seed);
    const double rnd = random_parser_accuracy(data.test, 12, seed);
    pass = pass && acc - rnd >= 0.20;
    detail += "seed " + std::to_string(seed) + ": sup " + fmt("%.3f", acc) + " rand " +
              fmt("%.3f", rnd) + (seed < 3 ? "; " : "");
  }
  return {pass, detail};
}

// 7. Learning-curve ordering at the smallest labeled count.
Outcome semi_supervised_ordering() {
  auto data = split_bank(mix_seed({7, 1}));
  ParserTrainConfig base;
  base.method = Method::searn_lr;
  auto curve = learning_curve(data.train, data.test, {5, 500}, {1, 2, 3}, base);
  std::map<std::pair<std::string, std::size_t>, double> at;
  for (const auto& p : curve) at[{p.mode, p.labeled}] = mean(p.accuracy);
  double unsup = 0.0;
  for (const auto& p : curve) {
    if (p.mode == "unsup") unsup = mean(p.accuracy);
  }
  const double semi = at[{"semi", 5}];
  const double sup = at[{"sup", 500}];
  return {semi >= unsup && sup >= semi, "unsup " + fmt("%.3f", unsup) + ", semi@5 " + fmt("%.3f", semi) +
                                            ", sup@500 " + fmt("%.3f", sup)};
}

double path_log_prob(const HmmParams& p, const std::vector<int>& x, const std::vector<int>& y) {
  double lp = std::log(p.initial[static_cast<std::size_t>(y[0])]) +
              std::log(p.emission(static_cast<std::size_t>(y[0]), static_cast<std::size_t>(x[0])));
  for (std::size_t t = 1; t < x.size(); ++t) {
    lp += std::log(p.transition(static_cast<std::size_t>(y[t - 1]), static_cast<std::size_t>(y[t])));
    lp += std::log(p.emission(static_cast<std::size_t>(y[t]), static_cast<std::size_t>(x[t])));
  }
  return lp;
}

double row_error(const Table& t) {
  double worst = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    auto row = t.row(r);
    worst = std::max(worst, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
  }
  return worst;
}

double vec_error(const std::vector<double>& v) {
  return std::abs(std::accumulate(v.begin(), v.end(), 0.0) - 1.0);
}

double brute_matched(const std::vector<int>& pred, const std::vector<int>& gold, int K) {
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1.0;
  do {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      wrong += perm[static_cast<std::size_t>(pred[i])] != gold[i] ? 1 : 0;
    }
    best = std::min(best, static_cast<double>(wrong) / static_cast<double>(pred.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// 8. Numerical properties.
Outcome numerical_suite() {
  SplitMix64 rng(8);
  auto uniform_int = [&](std::size_t n) { return static_cast<int>(rng() % n); };

  double grad_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t K = 2 + rng() % 3, F = 2 + rng() % 4;
    std::vector<LabeledExample> ex(12);
    for (auto& e : ex) {
      for (std::size_t j = 0; j < F; ++j) {
        if (rng.uniform() < 0.6) e.features.entries.push_back({static_cast<FeatureId>(j), rng.uniform() * 2 - 0.5});
      }
      e.label = uniform_int(K);
      e.weight = 0.2 + rng.uniform();
    }
    Table w(K, F);
    for (auto& v : w.data) v = rng.uniform() - 0.5;
    Table grad;
    lr_objective(w, ex, 0.7, &grad);
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      Table up = w, down = w;
      up.data[i] += 1e-5;
      down.data[i] -= 1e-5;
      const double fd = (lr_objective(up, ex, 0.7, nullptr) - lr_objective(down, ex, 0.7, nullptr)) / 2e-5;
      grad_err = std::max(grad_err, std::abs(fd - grad.data[i]) / std::max(std::abs(fd), 1e-8));
    }
  }

  double fwd_err = 0.0;
  double norm_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto p = hmm_random_init(3, 3, rng());
    std::vector<int> x(4), y(4, 0);
    for (auto& v : x) v = uniform_int(3);
    double total = 0.0;
    for (std::size_t code = 0; code < 81; ++code) {
      std::size_t c = code;
      for (auto& v : y) {
        v = static_cast<int>(c % 3);
        c /= 3;
      }
      total += std::exp(path_log_prob(p, x, y));
    }
    fwd_err = std::max(fwd_err, std::abs(hmm_log_likelihood(p, x) - std::log(total)));
  }

  double ll_drop = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t K = 2 + rng() % 3;
    std::vector<DocumentCounts> docs;
    for (auto& d : gen_documents({K, 5, 10, 20.0, rng()})) docs.push_back(d.doc);
    auto path = mm_em_train(docs, mm_random_init(K, 5, rng()), 15);
    for (std::size_t i = 1; i < path.size(); ++i) {
      ll_drop = std::max(ll_drop, mm_log_likelihood(path[i - 1], docs) - mm_log_likelihood(path[i], docs));
    }
    for (const auto& m : path) norm_err = std::max({norm_err, vec_error(m.rho), row_error(m.theta)});
    norm_err = std::max(norm_err, row_error(mm_e_step(path.back(), docs)));
  }

  for (int trial = 0; trial < 5; ++trial) {
    auto data = hmm_data(1 + trial % 2, 2 + rng() % 3, rng());
    std::vector<SymbolSequence> xs;
    for (auto& s : data) xs.push_back(s.x);
    auto res = hmm_em_train(xs, 3, 10, 20, rng());
    norm_err = std::max({norm_err, vec_error(res.params.initial), row_error(res.params.transition),
                         row_error(res.params.emission)});
  }

  double match_err = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + uniform_int(4);
    std::vector<int> pred(1 + rng() % 40), gold(pred.size());
    for (auto& v : pred) v = uniform_int(static_cast<std::size_t>(K));
    for (auto& v : gold) v = uniform_int(static_cast<std::size_t>(K));
    match_err = std::max(match_err, std::abs(matched_hamming(pred, gold, static_cast<std::size_t>(K),
                                                             static_cast<std::size_t>(K)) -
                                             brute_matched(pred, gold, K)));
  }

  const bool pass = grad_err < 1e-4 && fwd_err < 1e-10 && ll_drop <= 1e-9 && norm_err <= 1e-12 &&
                    match_err <= 1e-15;
  return {pass, "grad rel " + fmt("%.2g", grad_err) + ", forward " + fmt("%.2g", fwd_err) +
                    ", ll drop " + fmt("%.2g", ll_drop) + ", norm " + fmt("%.2g", norm_err) +
                    ", matching " + fmt("%.2g", match_err)};
}

void run_commands(const fs::path& root) {
  const auto here = fs::current_path();
  fs::remove_all(root);
  fs::create_directories(root);
  fs::current_path(root);
  cmd_gen({{"task", "sequence"}, {"order", "2"}, {"k", "3"}, {"runs", "2"}, {"seed", "3"}, {"out", "gen_seq"}});
  cmd_gen({{"task", "cluster"}, {"k", "3"}, {"runs", "2"}, {"seed", "3"}, {"out", "gen_docs"}});
  cmd_gen({{"task", "depparse"}, {"sentences", "80"}, {"seed", "3"}, {"out", "gen_tb"}});
  for (const char* m : {"em", "searn-nb", "searn-lr"}) {
    cmd_train({{"task", "sequence"}, {"method", m}, {"k", "3"}, {"iterations", "3"}, {"seed", "4"},
               {"data", "gen_seq/seq_0.txt"}, {"out", std::string("seq_") + m}});
  }
  cmd_train({{"task", "cluster"}, {"method", "em"}, {"k", "3"}, {"seed", "4"}, {"data", "gen_docs/docs_0.txt"}, {"out", "mm_em"}});
  cmd_train({{"task", "cluster"}, {"method", "searn-nb"}, {"k", "3"}, {"seed", "4"}, {"data", "gen_docs/docs_0.txt"},
             {"out", "mm_sampled"}});
  cmd_train({{"task", "cluster"}, {"method", "searn-nb"}, {"exact", "true"}, {"beta", "1"}, {"k", "3"}, {"seed", "4"},
             {"data", "gen_docs/docs_0.txt"}, {"out", "mm_exact"}});
  for (const char* sup : {"sup", "unsup", "semi"}) {
    cmd_train({{"task", "depparse"}, {"method", "searn-lr"}, {"supervision", sup}, {"labeled", "10"}, {"iterations", "2"},
               {"seed", "4"}, {"data", "gen_tb/train.conll"}, {"dev", "gen_tb/dev.conll"}, {"out", std::string("dp_") + sup}});
  }
  cmd_eval({{"model", "seq_searn-lr/model.json"}, {"data", "gen_seq/seq_0.txt"}, {"gold", "gen_seq/seq_0.gold"},
            {"seed", "5"}, {"out", "eval_seq"}});
  cmd_eval({{"model", "dp_sup/model.json"}, {"data", "gen_tb/test.conll"}, {"seed", "5"}, {"out", "eval_dp"}});
  cmd_learning_curve({{"data", "gen_tb/train.conll"}, {"test", "gen_tb/test.conll"}, {"labeled-counts", "5,20"},
                      {"seeds", "1,2"}, {"iterations", "2"}, {"out", "curve"}});
  cmd_equivalence({{"k", "2"}, {"runs", "3"}, {"iterations", "5"}, {"seed", "6"}, {"out", "equiv"}});
  fs::current_path(here);
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.log") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

// 9. Every command is byte-reproducible.
Outcome determinism() {
  const auto base = fs::temp_directory_path() / ("searn_acceptance_" + std::to_string(::getpid()));
  run_commands(base / "a");
  run_commands(base / "b");
  auto a = snapshot(base / "a");
  auto b = snapshot(base / "b");
  std::size_t differ = 0;
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    differ += it != b.end() && it->second == bytes ? 0 : 1;
  }
  differ += b.size() > a.size() ? b.size() - a.size() : 0;
  fs::remove_all(base);
  return {differ == 0 && !a.empty(), std::to_string(a.size()) + " files compared, differing " + std::to_string(differ)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"EM/SEARN equivalence", equivalence},
      {"HMM1 K=2 error levels", hmm1_table},
      {"HMM2 SEARN-LR lowest error", hmm2_direction},
      {"parser state machine", parser_state_machine},
      {"oracle round trip", oracle_round_trip},
      {"supervised beats random", supervised_beats_random},
      {"semi-supervised ordering", semi_supervised_ordering},
      {"numerical properties", numerical_suite},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu %s: %s (%s) [%.1fs]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
