#include "searn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "searn/em.hpp"
#include "searn/error.hpp"
#include "searn/eval.hpp"
#include "searn/rng.hpp"
#include "searn/serialize.hpp"
#include "searn/task_cluster.hpp"

namespace searn {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDecodeStream = 0x6465636f6465ULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string fmt_short(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << x;
  return os.str();
}

fs::path output_dir(const Settings& s) {
  fs::path out = s.str("out", ".");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ostringstream os;
  for (const auto& l : lines) os << l << '\n';
  write_text_file(path.string(), os.str());
}

std::vector<std::string> generator_header(const std::string& what, const Settings& s,
                                          const std::vector<std::string>& keys) {
  std::string line = "generator: " + what;
  for (const auto& k : keys) {
    if (s.has(k)) line += " " + k + "=" + s.str(k, "");
  }
  return {line};
}

std::uint64_t seed_of(const Settings& s) {
  return static_cast<std::uint64_t>(s.integer("seed", 0, 0));
}

std::vector<SymbolSequence> to_sequences(const IntSequenceFile& f) {
  std::vector<SymbolSequence> out;
  for (const auto& r : f.rows) {
    require(!r.empty(), ErrorKind::data, "empty sequence in corpus");
    out.push_back({r});
  }
  return out;
}

std::vector<int> flatten(const std::vector<std::vector<int>>& rows) {
  std::vector<int> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::string history_csv(const std::vector<IterationReport>& history,
                        const std::vector<std::string>& slot_names,
                        const std::vector<double>* extra = nullptr,
                        const std::string& extra_name = "") {
  std::ostringstream os;
  os << "iteration";
  for (const auto& n : slot_names) os << ',' << n << "_examples";
  os << ",train_regret,dev_accuracy";
  if (extra) os << ',' << extra_name;
  os << '\n';
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    os << h.iteration;
    for (std::size_t s = 0; s < slot_names.size(); ++s) {
      os << ',' << (s < h.examples_per_slot.size() ? h.examples_per_slot[s] : 0);
    }
    os << ',' << (std::isnan(h.train_regret) ? std::string("nan") : fmt(h.train_regret));
    os << ',' << (std::isnan(h.dev_accuracy) ? std::string("nan") : fmt(h.dev_accuracy));
    if (extra) os << ',' << fmt((*extra)[i]);
    os << '\n';
  }
  return os.str();
}

std::string timing_csv(const std::vector<IterationReport>& history) {
  std::ostringstream os;
  os << "iteration,seconds\n";
  for (const auto& h : history) os << h.iteration << ',' << h.seconds << '\n';
  return os.str();
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t tagset_for(const Settings& s, const std::vector<TaggedSentence>& sentences) {
  int max_tag = 1;
  for (const auto& sent : sentences) {
    for (int t : sent.tags) max_tag = std::max(max_tag, t);
  }
  auto tagset = s.integer("tagset", std::max(12, max_tag + 1), 2);
  require(tagset > max_tag, ErrorKind::config,
          "tagset " + std::to_string(tagset) + " is smaller than the largest tag in the data");
  return static_cast<std::size_t>(tagset);
}

std::string task_of(const Settings& s) {
  return s.choice("task", "", {"cluster", "sequence", "depparse"});
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "task",        "method",         "supervision",   "data",          "dev",
      "test",        "gold",           "model",         "out",           "seed",
      "seeds",       "runs",           "order",         "k",             "v",
      "sequences",   "mean-length",    "docs",          "doc-length",    "sentences",
      "tagset",      "max-length",     "stop-probability", "beta",       "n-samples",
      "iterations",  "em-iterations",  "patience",      "threads",       "exact",
      "tie-randomness", "action-mode", "weight-mode",   "smoothing",     "lr-variance",
      "tree-variance", "word-variance", "features",     "wide-emit",     "decode",
      "labeled",     "labeled-counts", "tolerance",
  };
  return keys;
}

void check_known_keys(const Config& cfg) {
  const auto& keys = known_config_keys();
  for (const auto& [k, v] : cfg) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      fail(ErrorKind::config, "unknown configuration key '" + k + "'");
    }
  }
}

Config parse_config(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    cfg[key] = trim(line.substr(eq + 1));
  }
  check_known_keys(cfg);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file " + path);
  return parse_config(in, path);
}

std::string Settings::str(const std::string& key, const std::string& fallback) const {
  auto it = cfg_.find(key);
  return it == cfg_.end() ? fallback : it->second;
}

std::string Settings::required(const std::string& key) const {
  auto it = cfg_.find(key);
  if (it == cfg_.end() || it->second.empty()) fail(ErrorKind::config, "missing required setting '" + key + "'");
  return it->second;
}

long long Settings::integer(const std::string& key, long long fallback, long long lo) const {
  auto it = cfg_.find(key);
  if (it == cfg_.end()) return fallback;
  long long v = 0;
  std::size_t pos = 0;
  try {
    v = std::stoll(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != it->second.size()) fail(ErrorKind::config, "'" + key + "' must be an integer");
  if (v < lo) fail(ErrorKind::config, "'" + key + "' must be at least " + std::to_string(lo));
  return v;
}

double Settings::real(const std::string& key, double fallback) const {
  auto it = cfg_.find(key);
  if (it == cfg_.end()) return fallback;
  double v = 0;
  std::size_t pos = 0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != it->second.size() || !std::isfinite(v)) {
    fail(ErrorKind::config, "'" + key + "' must be a finite number");
  }
  return v;
}

bool Settings::flag(const std::string& key, bool fallback) const {
  auto it = cfg_.find(key);
  if (it == cfg_.end()) return fallback;
  const auto& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on" || v.empty()) return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::config, "'" + key + "' must be true or false");
}

std::vector<std::string> Settings::list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(str(key, ""));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<long long> Settings::int_list(const std::string& key,
                                          std::vector<long long> fallback) const {
  if (!has(key)) return fallback;
  std::vector<long long> out;
  for (const auto& item : list(key)) {
    Settings one(Config{{key, item}});
    out.push_back(one.integer(key, 0, 0));
  }
  if (out.empty()) fail(ErrorKind::config, "'" + key + "' must list at least one integer");
  return out;
}

std::string Settings::choice(const std::string& key, const std::string& fallback,
                             const std::vector<std::string>& allowed) const {
  std::string v = fallback.empty() ? required(key) : str(key, fallback);
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
    fail(ErrorKind::config, "'" + key + "' must be one of " + opts + ", got '" + v + "'");
  }
  return v;
}

Method parse_method(const std::string& name) {
  if (name == "em") return Method::em;
  if (name == "searn-nb") return Method::searn_nb;
  if (name == "searn-lr") return Method::searn_lr;
  fail(ErrorKind::config, "unknown method '" + name + "' (em|searn-nb|searn-lr)");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::em: return "em";
    case Method::searn_nb: return "searn-nb";
    case Method::searn_lr: return "searn-lr";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Sequences

SequenceLearnerConfig sequence_learner_from(const Settings& s) {
  SequenceLearnerConfig c;
  c.method = parse_method(s.choice("method", "", {"em", "searn-nb", "searn-lr"}));
  c.K = static_cast<std::size_t>(s.integer("k", 2, 1));
  c.seed = seed_of(s);
  c.em_iterations = static_cast<std::size_t>(s.integer("em-iterations", 200, 1));
  c.em_tolerance = s.real("tolerance", 1e-5);
  c.posterior_decode = s.choice("decode", "viterbi", {"viterbi", "posterior"}) == "posterior";
  c.beta = s.real("beta", 0.3);
  c.n_samples = static_cast<std::size_t>(s.integer("n-samples", 2, 1));
  c.iterations = static_cast<std::size_t>(s.integer("iterations", 20, 1));
  c.action_mode = s.choice("action-mode", "argmin", {"argmin", "sample"}) == "sample"
                      ? ActionMode::sample
                      : ActionMode::argmin;
  c.nb_smoothing = s.real("smoothing", 1e-2);
  c.lr_variance = s.real("lr-variance", 1.0);
  if (s.has("features")) {
    c.features = s.choice("features", "", {"nb_hmm", "lr_window"}) == "lr_window"
                     ? SequenceFeatures::lr_window
                     : SequenceFeatures::nb_hmm;
  }
  c.wide_emit = s.flag("wide-emit", false);
  c.tie_randomness = s.flag("tie-randomness", true);
  c.threads = static_cast<std::size_t>(s.integer("threads", 1, 1));
  return c;
}

SequenceModel train_sequence_model(const std::vector<SymbolSequence>& data, std::size_t V,
                                   const SequenceLearnerConfig& cfg) {
  require(!data.empty(), ErrorKind::data, "no sequences to train on");
  SequenceModel m;
  m.method = cfg.method;
  m.K = cfg.K;
  m.V = V;
  if (cfg.method == Method::em) {
    auto res = hmm_em_train(data, cfg.K, V, cfg.em_iterations, cfg.seed, cfg.em_tolerance);
    m.hmm = std::move(res.params);
    m.log_likelihood = std::move(res.log_likelihood);
    return m;
  }
  const bool lr = cfg.method == Method::searn_lr;
  m.task.K = cfg.K;
  m.task.V = V;
  m.task.feature_mode = cfg.features.value_or(lr ? SequenceFeatures::lr_window : SequenceFeatures::nb_hmm);
  m.task.wide_emit = cfg.wide_emit;
  SequenceTask task(data, m.task);

  SearnOptions opt;
  opt.beta = cfg.beta;
  opt.rollout.n_samples = cfg.n_samples;
  opt.rollout.tie_randomness = cfg.tie_randomness;
  opt.rollout.seed = cfg.seed;
  opt.rollout.threads = cfg.threads;
  opt.learner.kind = lr ? LearnerKind::logistic : LearnerKind::naive_bayes;
  opt.learner.nb_smoothing = cfg.nb_smoothing;
  opt.learner.lr_variance = {cfg.lr_variance};
  opt.stopping.max_iterations = cfg.iterations;
  opt.action_mode = cfg.action_mode;
  auto res = searn_learn(task, opt, m.interner);
  m.policy = std::move(res.policy);
  m.history = std::move(res.history);
  return m;
}

std::vector<std::vector<int>> label_sequences(const SequenceModel& model,
                                              const std::vector<SymbolSequence>& data,
                                              std::uint64_t seed, bool posterior_decode) {
  std::vector<std::vector<int>> out;
  if (model.method == Method::em) {
    for (const auto& x : data) {
      out.push_back(posterior_decode ? hmm_posterior_decode(model.hmm, x.symbols)
                                     : hmm_decode(model.hmm, x.symbols));
    }
    return out;
  }
  SequenceTask task(data, model.task);
  for (std::size_t n = 0; n < data.size(); ++n) {
    auto traj = run_policy(task, n, model.policy, mix_seed({seed, kDecodeStream, n}),
                           model.interner, false);
    std::vector<int> labels;
    for (std::size_t t = 0; t < data[n].size(); ++t) labels.push_back(traj.decisions[t].action);
    out.push_back(std::move(labels));
  }
  return out;
}

double sequence_error(const std::vector<LabeledSequence>& data, std::size_t V,
                      const SequenceLearnerConfig& cfg) {
  std::vector<SymbolSequence> xs;
  std::vector<int> gold;
  std::size_t K_gold = 1;
  for (const auto& s : data) {
    xs.push_back(s.x);
    gold.insert(gold.end(), s.labels.begin(), s.labels.end());
    for (int y : s.labels) K_gold = std::max(K_gold, static_cast<std::size_t>(y) + 1);
  }
  auto model = train_sequence_model(xs, V, cfg);
  auto pred = flatten(label_sequences(model, xs, cfg.seed, cfg.posterior_decode));
  return matched_hamming(pred, gold, cfg.K, std::max(K_gold, cfg.K));
}

// ---------------------------------------------------------------------------
// Parsing

ParserTrainConfig parser_config_from(const Settings& s) {
  ParserTrainConfig c;
  c.method = parse_method(s.choice("method", "searn-lr", {"em", "searn-nb", "searn-lr"}));
  const auto sup = s.choice("supervision", "unsup", {"unsup", "sup", "semi"});
  c.supervision = sup == "sup" ? Supervision::sup : sup == "semi" ? Supervision::semi : Supervision::unsup;
  c.beta = s.real("beta", 0.1);
  c.n_samples = static_cast<std::size_t>(s.integer("n-samples", 1, 1));
  c.iterations = static_cast<std::size_t>(s.integer("iterations", 10, 1));
  c.patience = static_cast<std::size_t>(s.integer("patience", 3, 1));
  c.tree_variance = s.real("tree-variance", c.tree_variance);
  c.word_variance = s.real("word-variance", c.word_variance);
  c.nb_smoothing = s.real("smoothing", 1e-2);
  c.seed = seed_of(s);
  c.threads = static_cast<std::size_t>(s.integer("threads", 1, 1));
  return c;
}

TrainedParser train_parser(const std::vector<TaggedSentence>& train, const ParserTrainConfig& cfg,
                           const std::vector<TaggedSentence>* dev) {
  require(cfg.method != Method::em, ErrorKind::config,
          "em is only available for the cluster and sequence tasks");
  require(!train.empty(), ErrorKind::data, "no training sentences");
  DepParseTask task(train, {cfg.tagset_size, cfg.supervision});
  std::optional<DepParseTask> dev_task;
  if (dev && !dev->empty()) dev_task.emplace(*dev, DepParseConfig{cfg.tagset_size, cfg.supervision});

  SearnOptions opt;
  opt.beta = cfg.beta;
  opt.rollout.n_samples = cfg.n_samples;
  opt.rollout.seed = cfg.seed;
  opt.rollout.threads = cfg.threads;
  opt.learner.kind = cfg.method == Method::searn_lr ? LearnerKind::logistic : LearnerKind::naive_bayes;
  opt.learner.nb_smoothing = cfg.nb_smoothing;
  opt.learner.lr_variance = {cfg.tree_variance, cfg.word_variance};
  opt.stopping.max_iterations = cfg.iterations;
  opt.stopping.patience = cfg.patience;
  opt.stopping.dev = dev_task ? &*dev_task : nullptr;

  TrainedParser out;
  auto res = searn_learn(task, opt, out.interner);
  out.policy = std::move(res.policy);
  out.history = std::move(res.history);
  out.best_iteration = res.best_iteration;
  return out;
}

std::vector<DependencyTree> parse_all(const Policy& policy, const FeatureInterner& interner,
                                      const std::vector<TaggedSentence>& sentences,
                                      std::size_t tagset_size, std::uint64_t seed) {
  std::vector<DependencyTree> out;
  out.reserve(sentences.size());
  for (std::size_t n = 0; n < sentences.size(); ++n) {
    out.push_back(parse_sentence(sentences[n], policy, mix_seed({seed, kDecodeStream, n}),
                                 interner, tagset_size));
  }
  return out;
}

double parser_accuracy(const Policy& policy, const FeatureInterner& interner,
                       const std::vector<TaggedSentence>& sentences, std::size_t tagset_size,
                       std::uint64_t seed) {
  std::vector<DependencyTree> gold;
  for (const auto& s : sentences) {
    require(s.gold.has_value(), ErrorKind::data, "evaluation sentences need gold trees");
    gold.push_back(*s.gold);
  }
  auto pred = parse_all(policy, interner, sentences, tagset_size, seed);
  return arc_accuracy_pooled(pred, gold);
}

double random_parser_accuracy(const std::vector<TaggedSentence>& sentences, std::size_t tagset_size,
                              std::uint64_t seed) {
  FeatureInterner empty;
  return parser_accuracy(Policy::initial(), empty, sentences, tagset_size, seed);
}

std::vector<TaggedSentence> with_labels(const std::vector<TaggedSentence>& sentences,
                                        std::size_t labeled) {
  std::vector<TaggedSentence> out = sentences;
  for (std::size_t n = labeled; n < out.size(); ++n) out[n].gold.reset();
  return out;
}

std::vector<CurvePoint> learning_curve(const std::vector<TaggedSentence>& train,
                                       const std::vector<TaggedSentence>& test,
                                       const std::vector<std::size_t>& labeled_counts,
                                       const std::vector<std::uint64_t>& seeds,
                                       const ParserTrainConfig& base) {
  require(!seeds.empty(), ErrorKind::config, "at least one seed is required");
  for (auto c : labeled_counts) {
    require(c >= 1 && c <= train.size(), ErrorKind::config,
            "labeled count " + std::to_string(c) + " exceeds the corpus size " +
                std::to_string(train.size()));
  }
  std::vector<CurvePoint> points;
  CurvePoint unsup{"unsup", 0, {}};
  for (auto seed : seeds) {
    ParserTrainConfig cfg = base;
    cfg.seed = seed;
    cfg.supervision = Supervision::unsup;
    auto p = train_parser(with_labels(train, 0), cfg);
    unsup.accuracy.push_back(parser_accuracy(p.policy, p.interner, test, cfg.tagset_size, seed));
  }
  points.push_back(unsup);
  for (auto c : labeled_counts) {
    CurvePoint semi{"semi", c, {}};
    CurvePoint sup{"sup", c, {}};
    for (auto seed : seeds) {
      ParserTrainConfig cfg = base;
      cfg.seed = seed;
      cfg.supervision = Supervision::semi;
      auto ps = train_parser(with_labels(train, c), cfg);
      semi.accuracy.push_back(parser_accuracy(ps.policy, ps.interner, test, cfg.tagset_size, seed));
      cfg.supervision = Supervision::sup;
      std::vector<TaggedSentence> labeled(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(c));
      auto pl = train_parser(labeled, cfg);
      sup.accuracy.push_back(parser_accuracy(pl.policy, pl.interner, test, cfg.tagset_size, seed));
    }
    points.push_back(semi);
    points.push_back(sup);
  }
  return points;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_gen(const Config& cfg) {
  check_known_keys(cfg);
  Settings s(cfg);
  const auto task = task_of(s);
  const auto out = output_dir(s);
  const auto seed = seed_of(s);
  std::ostringstream report;

  if (task == "sequence") {
    HmmGenConfig g;
    g.order = static_cast<int>(s.integer("order", 1, 1));
    g.K = static_cast<std::size_t>(s.integer("k", 2, 2));
    g.V = static_cast<std::size_t>(s.integer("v", 10, 2));
    g.n_sequences = static_cast<std::size_t>(s.integer("sequences", 5, 1));
    g.mean_length = s.real("mean-length", 40.0);
    const auto runs = static_cast<std::size_t>(s.integer("runs", 1, 1));
    for (std::size_t r = 0; r < runs; ++r) {
      g.seed = mix_seed({seed, r});
      validate(g);
      const auto params = gen_hmm_params(g);
      const auto data = gen_hmm_dataset(params, g);
      auto header = generator_header("hmm", s, {"order", "k", "v", "sequences", "mean-length"});
      header.push_back("seed=" + std::to_string(seed) + " run=" + std::to_string(r));
      IntSequenceFile xs{"V", g.V, {}};
      IntSequenceFile ys{"K", g.K, {}};
      for (const auto& seq : data) {
        xs.rows.push_back(seq.x.symbols);
        ys.rows.push_back(seq.labels);
      }
      const std::string stem = "seq_" + std::to_string(r);
      write_sequences((out / (stem + ".txt")).string(), xs, header);
      write_sequences((out / (stem + ".gold")).string(), ys, header);
      std::map<std::string, std::string> meta{{"order", std::to_string(g.order)},
                                              {"seed", std::to_string(seed)},
                                              {"run", std::to_string(r)}};
      write_text_file((out / (stem + ".params.json")).string(),
                      hmm_to_json(first_order_params(params), meta));
    }
    report << "wrote " << runs << " sequence dataset(s) of " << g.n_sequences
           << " sequences to " << out.string() << '\n';
  } else if (task == "cluster") {
    MixtureGenConfig g;
    g.K = static_cast<std::size_t>(s.integer("k", 2, 1));
    g.V = static_cast<std::size_t>(s.integer("v", 5, 2));
    g.n_docs = static_cast<std::size_t>(s.integer("docs", 10, 1));
    g.mean_length = s.real("doc-length", 20.0);
    const auto runs = static_cast<std::size_t>(s.integer("runs", 1, 1));
    for (std::size_t r = 0; r < runs; ++r) {
      g.seed = mix_seed({seed, r});
      const auto docs = gen_documents(g);
      auto header = generator_header("mixture", s, {"k", "v", "docs", "doc-length"});
      header.push_back("seed=" + std::to_string(seed) + " run=" + std::to_string(r));
      DocumentFile df{g.V, {}};
      IntSequenceFile ys{"K", g.K, {{}}};
      for (const auto& d : docs) {
        df.docs.push_back(d.doc);
        ys.rows[0].push_back(d.cluster);
      }
      const std::string stem = "docs_" + std::to_string(r);
      write_documents((out / (stem + ".txt")).string(), df, header);
      write_sequences((out / (stem + ".gold")).string(), ys, header);
    }
    report << "wrote " << runs << " document corpus(es) of " << g.n_docs << " documents to "
           << out.string() << '\n';
  } else {
    TreebankGenConfig g;
    g.n_sentences = static_cast<std::size_t>(s.integer("sentences", 500, 1));
    g.tagset_size = static_cast<std::size_t>(s.integer("tagset", 12, 2));
    g.max_length = static_cast<std::size_t>(s.integer("max-length", 10, 2));
    g.stop_probability = s.real("stop-probability", 0.6);
    g.seed = seed;
    const auto bank = gen_treebank(g);
    auto header = generator_header("treebank", s, {"sentences", "tagset", "max-length", "stop-probability"});
    header.push_back("seed=" + std::to_string(seed));
    std::vector<TaggedSentence> parts[3];
    for (std::size_t n = 0; n < bank.size(); ++n) parts[static_cast<int>(split_of(n))].push_back(bank[n]);
    write_conll((out / "treebank.conll").string(), bank, header);
    const char* names[3] = {"train", "dev", "test"};
    for (int p = 0; p < 3; ++p) {
      auto h = header;
      h.push_back(std::string("split=") + names[p]);
      write_conll((out / (std::string(names[p]) + ".conll")).string(), parts[p], h);
    }
    report << "wrote " << bank.size() << " sentences (" << parts[0].size() << " train, "
           << parts[1].size() << " dev, " << parts[2].size() << " test) to " << out.string() << '\n';
  }
  return {report.str(), true};
}

CommandResult cmd_train(const Config& cfg) {
  check_known_keys(cfg);
  Settings s(cfg);
  const auto task = task_of(s);
  const auto method = parse_method(s.choice("method", "", {"em", "searn-nb", "searn-lr"}));
  const auto data_path = s.required("data");
  const auto out = output_dir(s);
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream report;

  if (task == "sequence") {
    const auto file = load_sequences(data_path, "V");
    const auto data = to_sequences(file);
    const auto lc = sequence_learner_from(s);
    const auto model = train_sequence_model(data, file.value, lc);
    std::map<std::string, std::string> meta{{"task", "sequence"},
                                            {"method", method_name(method)},
                                            {"k", std::to_string(lc.K)},
                                            {"v", std::to_string(file.value)}};
    if (method == Method::em) {
      write_text_file((out / "model.json").string(), hmm_to_json(model.hmm, meta));
      std::vector<std::string> lines{"iteration,log_likelihood"};
      for (std::size_t i = 0; i < model.log_likelihood.size(); ++i) {
        lines.push_back(std::to_string(i) + "," + fmt(model.log_likelihood[i]));
      }
      write_lines(out / "train_log.csv", lines);
      write_lines(out / "timing.log", {"total_seconds," + std::to_string(elapsed(start))});
      report << "EM stopped after " << model.log_likelihood.size() << " passes, log-likelihood "
             << fmt_short(model.log_likelihood.back()) << '\n';
    } else {
      meta["features"] = model.task.feature_mode == SequenceFeatures::lr_window ? "lr_window" : "nb_hmm";
      meta["wide-emit"] = model.task.wide_emit ? "true" : "false";
      write_text_file((out / "model.json").string(), policy_to_json(model.policy, model.interner, meta));
      write_text_file((out / "train_log.csv").string(), history_csv(model.history, {"latent", "emit"}));
      write_text_file((out / "timing.log").string(), timing_csv(model.history));
      report << method_name(method) << " trained for " << model.history.size() << " iterations\n";
    }
  } else if (task == "cluster") {
    const auto file = load_documents(data_path);
    const auto K = static_cast<std::size_t>(s.integer("k", 2, 1));
    const auto V = file.V;
    const auto seed = seed_of(s);
    const auto iterations = static_cast<std::size_t>(s.integer("iterations", 10, 1));
    const auto init = mm_random_init(K, V, mix_seed({seed, kInitStream}));
    std::map<std::string, std::string> meta{{"task", "cluster"},
                                            {"method", method_name(method)},
                                            {"k", std::to_string(K)},
                                            {"v", std::to_string(V)}};
    if (method == Method::em) {
      const auto traj = mm_em_train(file.docs, init, iterations);
      write_text_file((out / "model.json").string(), mixture_to_json(traj.back(), meta));
      std::vector<std::string> lines{"iteration,log_likelihood"};
      for (std::size_t i = 0; i < traj.size(); ++i) {
        lines.push_back(std::to_string(i + 1) + "," + fmt(mm_log_likelihood(traj[i], file.docs)));
      }
      write_lines(out / "train_log.csv", lines);
      write_lines(out / "timing.log", {"total_seconds," + std::to_string(elapsed(start))});
      report << "EM ran " << iterations << " iterations\n";
    } else {
      const bool exact = s.flag("exact", false);
      ClusterTask ctask(file.docs, {K, V, exact});
      FeatureInterner interner;
      auto init_rule = cluster_rule_from_params(init, interner);
      SearnOptions opt;
      opt.beta = s.real("beta", 0.1);
      opt.rollout.mode = exact ? RolloutMode::exact : RolloutMode::sampled;
      opt.rollout.n_samples = static_cast<std::size_t>(s.integer("n-samples", 2, 1));
      opt.rollout.seed = seed;
      opt.rollout.threads = static_cast<std::size_t>(s.integer("threads", 1, 1));
      opt.learner.kind = method == Method::searn_lr ? LearnerKind::logistic : LearnerKind::naive_bayes;
      opt.learner.weight_mode = s.choice("weight-mode", "softmin", {"softmin", "argmin_spread"}) == "softmin"
                                    ? WeightMode::softmin
                                    : WeightMode::argmin_spread;
      const double smoothing = s.real("smoothing", exact ? 0.0 : 1e-2);
      opt.learner.nb_smoothing = smoothing;
      opt.learner.density_smoothing = smoothing;
      opt.learner.lr_variance = {s.real("lr-variance", 1.0)};
      opt.stopping.max_iterations = iterations;
      std::vector<double> ll;
      auto res = searn_learn(ctask, opt, interner, Policy::initial(init_rule),
                             [&](const IterationReport&, const LearnedRule& h, const Policy&) {
                               ll.push_back(mm_log_likelihood(
                                   cluster_params_from_rule(h, K, V, interner), file.docs));
                             });
      meta["exact"] = exact ? "true" : "false";
      write_text_file((out / "model.json").string(), policy_to_json(res.policy, interner, meta));
      write_text_file((out / "train_log.csv").string(),
                      history_csv(res.history, {"cluster", "emit"}, &ll, "log_likelihood"));
      write_text_file((out / "timing.log").string(), timing_csv(res.history));
      report << method_name(method) << " trained for " << res.history.size() << " iterations\n";
    }
  } else {
    require(method != Method::em, ErrorKind::config,
            "em is only available for the cluster and sequence tasks");
    auto corpus = load_conll(data_path);
    auto pc = parser_config_from(s);
    pc.tagset_size = tagset_for(s, corpus.sentences);
    std::vector<TaggedSentence> train = corpus.sentences;
    if (s.has("labeled") || pc.supervision == Supervision::semi) {
      const auto c = static_cast<std::size_t>(s.integer("labeled", static_cast<long long>(train.size()), 0));
      require(c <= train.size(), ErrorKind::config, "labeled count exceeds the corpus size");
      if (pc.supervision == Supervision::sup) {
        train.resize(c);
      } else {
        train = with_labels(train, c);
      }
    }
    if (pc.supervision == Supervision::unsup) train = with_labels(train, 0);
    std::vector<TaggedSentence> dev;
    if (s.has("dev")) dev = load_conll(s.str("dev", "")).sentences;
    auto parser = train_parser(train, pc, s.has("dev") ? &dev : nullptr);
    std::map<std::string, std::string> meta{
        {"task", "depparse"},
        {"method", method_name(method)},
        {"tagset", std::to_string(pc.tagset_size)},
        {"supervision", s.str("supervision", "unsup")}};
    write_text_file((out / "model.json").string(), policy_to_json(parser.policy, parser.interner, meta));
    write_text_file((out / "train_log.csv").string(), history_csv(parser.history, {"tree", "word"}));
    write_text_file((out / "timing.log").string(), timing_csv(parser.history));
    report << method_name(method) << " parser trained for " << parser.history.size()
           << " iterations (kept iteration " << parser.best_iteration << ")";
    if (corpus.rejected_nonprojective) {
      report << "; rejected " << corpus.rejected_nonprojective << " non-projective sentences";
    }
    report << '\n';
  }
  return {report.str(), true};
}

CommandResult cmd_eval(const Config& cfg) {
  check_known_keys(cfg);
  Settings s(cfg);
  const auto models = s.list("model");
  const auto datas = s.list("data");
  const auto golds = s.list("gold");
  require(!models.empty(), ErrorKind::config, "missing required setting 'model'");
  require(datas.size() == models.size(), ErrorKind::config,
          "'model' and 'data' must list the same number of files");
  const auto out = output_dir(s);
  const auto seed = seed_of(s);

  std::string metric;
  std::vector<double> values;
  for (std::size_t r = 0; r < models.size(); ++r) {
    const auto text = read_text_file(models[r]);
    const auto format = model_format(text);
    const auto meta = model_meta(text);
    auto it = meta.find("task");
    require(it != meta.end(), ErrorKind::data, models[r] + " does not name its task");
    const std::string task = it->second;
    if (s.has("task")) {
      require(s.str("task", "") == task, ErrorKind::config,
              "model " + models[r] + " was trained for the " + task + " task");
    }
    auto meta_int = [&](const std::string& key) {
      auto m = meta.find(key);
      require(m != meta.end(), ErrorKind::data, models[r] + " lacks '" + key + "'");
      return static_cast<std::size_t>(std::stoul(m->second));
    };

    std::string this_metric;
    double value = 0.0;
    if (task == "sequence" || task == "cluster") {
      require(golds.size() == models.size(), ErrorKind::config,
              "'gold' must list one labeling per model");
      const auto gold_file = load_sequences(golds[r], "K");
      const auto gold = flatten(gold_file.rows);
      const std::size_t K = meta_int("k");
      std::vector<int> pred;
      if (task == "sequence") {
        const auto file = load_sequences(datas[r], "V");
        const auto data = to_sequences(file);
        SequenceModel m;
        m.K = K;
        m.V = file.value;
        if (format == "hmm") {
          m.method = Method::em;
          m.hmm = hmm_from_json(text);
          require(m.hmm.vocab_size() == file.value, ErrorKind::data, "model and data vocabularies differ");
        } else {
          auto saved = policy_from_json(text);
          m.method = parse_method(meta.at("method"));
          m.policy = std::move(saved.policy);
          m.interner = std::move(saved.interner);
          m.task = {K, file.value,
                    meta.count("features") && meta.at("features") == "lr_window" ? SequenceFeatures::lr_window
                                                                                  : SequenceFeatures::nb_hmm,
                    meta.count("wide-emit") && meta.at("wide-emit") == "true"};
        }
        const bool posterior = s.choice("decode", "viterbi", {"viterbi", "posterior"}) == "posterior";
        pred = flatten(label_sequences(m, data, seed, posterior));
      } else {
        const auto file = load_documents(datas[r]);
        if (format == "mixture") {
          const auto params = mixture_from_json(text);
          const auto z = mm_e_step(params, file.docs);
          for (std::size_t n = 0; n < z.rows; ++n) pred.push_back(argmin_legal(
              [&] { std::vector<double> c(z.cols); for (std::size_t k = 0; k < z.cols; ++k) c[k] = -z(n, k); return c; }()));
        } else {
          auto saved = policy_from_json(text);
          ClusterTask ctask(file.docs, {K, file.V, false});
          for (std::size_t n = 0; n < file.docs.size(); ++n) {
            auto traj = run_policy(ctask, n, saved.policy, mix_seed({seed, kDecodeStream, n}),
                                   saved.interner, false);
            pred.push_back(traj.decisions.front().action);
          }
        }
      }
      this_metric = "matched_hamming";
      value = matched_hamming(pred, gold, K, std::max<std::size_t>(gold_file.value, K));
    } else if (task == "depparse") {
      const auto corpus = load_conll(datas[r]);
      auto saved = policy_from_json(text);
      this_metric = "arc_accuracy";
      value = parser_accuracy(saved.policy, saved.interner, corpus.sentences, meta_int("tagset"), seed);
    } else {
      fail(ErrorKind::data, models[r] + " names an unknown task '" + task + "'");
    }
    require(metric.empty() || metric == this_metric, ErrorKind::config,
            "all evaluated models must belong to the same task");
    metric = this_metric;
    values.push_back(value);
  }
  const auto summary = summarize(metric, values);
  write_metrics_csv((out / "metrics.csv").string(), {summary});
  write_text_file((out / "summary.json").string(), summaries_to_json({summary}));
  std::ostringstream report;
  report << metric << ": " << fmt_short(summary.mean) << " +/- " << fmt_short(summary.stddev)
         << " over " << summary.runs() << " run(s)\n";
  return {report.str(), true};
}

CommandResult cmd_learning_curve(const Config& cfg) {
  check_known_keys(cfg);
  Settings s(cfg);
  if (s.has("task")) {
    require(s.str("task", "") == "depparse", ErrorKind::config,
            "learning curves are defined for the depparse task");
  }
  const auto train = load_conll(s.required("data")).sentences;
  const auto test = load_conll(s.required("test")).sentences;
  auto base = parser_config_from(s);
  require(base.method != Method::em, ErrorKind::config,
          "em is only available for the cluster and sequence tasks");
  std::vector<TaggedSentence> both = train;
  both.insert(both.end(), test.begin(), test.end());
  base.tagset_size = tagset_for(s, both);
  std::vector<std::size_t> counts;
  for (auto c : s.int_list("labeled-counts", {5, 10, 20, 50})) counts.push_back(static_cast<std::size_t>(c));
  std::vector<std::uint64_t> seeds;
  for (auto v : s.int_list("seeds", {1, 2, 3})) seeds.push_back(static_cast<std::uint64_t>(v));
  const auto out = output_dir(s);

  const auto points = learning_curve(train, test, counts, seeds, base);
  std::vector<std::string> runs{"mode,labeled,seed,accuracy"};
  std::vector<std::string> curve{"mode,labeled,mean,stddev,lower,upper"};
  std::ostringstream report;
  for (const auto& p : points) {
    for (std::size_t i = 0; i < p.accuracy.size(); ++i) {
      runs.push_back(p.mode + "," + std::to_string(p.labeled) + "," + std::to_string(seeds[i]) + "," +
                     fmt(p.accuracy[i]));
    }
    const auto sum = summarize(p.mode, p.accuracy);
    curve.push_back(p.mode + "," + std::to_string(p.labeled) + "," + fmt(sum.mean) + "," +
                    fmt(sum.stddev) + "," + fmt(sum.mean - 2 * sum.stddev) + "," +
                    fmt(sum.mean + 2 * sum.stddev));
    report << p.mode << " labeled=" << p.labeled << ": " << fmt_short(sum.mean) << " +/- "
           << fmt_short(2 * sum.stddev) << '\n';
  }
  write_lines(out / "curve_runs.csv", runs);
  write_lines(out / "curve.csv", curve);
  return {report.str(), true};
}

CommandResult cmd_equivalence(const Config& cfg) {
  check_known_keys(cfg);
  Settings s(cfg);
  const auto K = static_cast<std::size_t>(s.integer("k", 2, 1));
  const auto iterations = static_cast<std::size_t>(s.integer("iterations", 10, 1));
  const auto seed = seed_of(s);
  const double tolerance = s.real("tolerance", 1e-8);
  const auto out = output_dir(s);

  std::vector<std::vector<DocumentCounts>> corpora;
  std::size_t V = 0;
  if (s.has("data")) {
    auto file = load_documents(s.str("data", ""));
    V = file.V;
    corpora.push_back(std::move(file.docs));
  } else {
    MixtureGenConfig g;
    g.K = K;
    g.V = static_cast<std::size_t>(s.integer("v", 5, 2));
    g.n_docs = static_cast<std::size_t>(s.integer("docs", 10, 1));
    g.mean_length = s.real("doc-length", 20.0);
    V = g.V;
    const auto runs = static_cast<std::size_t>(s.integer("runs", 20, 1));
    for (std::size_t r = 0; r < runs; ++r) {
      g.seed = mix_seed({seed, r});
      std::vector<DocumentCounts> docs;
      for (auto& d : gen_documents(g)) docs.push_back(std::move(d.doc));
      corpora.push_back(std::move(docs));
    }
  }

  std::vector<std::string> lines{"run,iteration,max_abs_diff,em_log_likelihood,searn_log_likelihood"};
  std::size_t passed = 0;
  double worst = 0.0;
  for (std::size_t r = 0; r < corpora.size(); ++r) {
    const auto init = mm_random_init(K, V, mix_seed({seed, r, kInitStream}));
    const auto rep = run_equivalence(corpora[r], K, V, iterations, init, init, tolerance);
    passed += rep.passed ? 1 : 0;
    for (std::size_t i = 0; i < rep.max_abs_diff.size(); ++i) {
      worst = std::max(worst, rep.max_abs_diff[i]);
      lines.push_back(std::to_string(r) + "," + std::to_string(i + 1) + "," + fmt(rep.max_abs_diff[i]) +
                      "," + fmt(rep.em_log_likelihood[i]) + "," + fmt(rep.searn_log_likelihood[i]));
    }
  }
  write_lines(out / "equivalence.csv", lines);
  std::ostringstream report;
  const bool ok = passed == corpora.size();
  report << (ok ? "PASS" : "FAIL") << ": " << passed << "/" << corpora.size()
         << " corpora matched EM for " << iterations << " iterations (worst difference " << worst
         << ", tolerance " << tolerance << ")\n";
  return {report.str(), ok};
}

}  // namespace searn
