#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "searn/datagen.hpp"
#include "searn/searn.hpp"
#include "searn/task_depparse.hpp"
#include "searn/task_sequence.hpp"

namespace searn {

// Flat key/value experiment configuration. Keys mirror the CLI flag names
// (without the leading dashes).
using Config = std::map<std::string, std::string>;

// `key = value` lines; '#' starts a comment.
Config parse_config(std::istream& in, const std::string& source);
Config load_config(const std::string& path);
// Throws a config error for keys no command understands.
void check_known_keys(const Config& cfg);
const std::vector<std::string>& known_config_keys();

// Typed, validated access to a Config.
class Settings {
 public:
  explicit Settings(Config cfg) : cfg_(std::move(cfg)) {}

  bool has(const std::string& key) const { return cfg_.count(key) != 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& key) const;
  long long integer(const std::string& key, long long fallback, long long lo) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<long long> int_list(const std::string& key, std::vector<long long> fallback) const;
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) const;

  const Config& raw() const { return cfg_; }

 private:
  Config cfg_;
};

// ---------------------------------------------------------------------------
// Sequence experiments (synthetic HMM data)

enum class Method { em, searn_nb, searn_lr };
Method parse_method(const std::string& name);
const char* method_name(Method m);

struct SequenceLearnerConfig {
  Method method = Method::em;
  std::size_t K = 2;
  std::uint64_t seed = 0;
  // EM
  std::size_t em_iterations = 200;
  double em_tolerance = 1e-5;
  bool posterior_decode = false;
  // SEARN
  double beta = 0.3;
  std::size_t n_samples = 2;
  std::size_t iterations = 20;
  ActionMode action_mode = ActionMode::argmin;
  double nb_smoothing = 1e-2;
  double lr_variance = 1.0;
  std::optional<SequenceFeatures> features;  // default by method
  bool wide_emit = false;
  bool tie_randomness = true;
  std::size_t threads = 1;
};

SequenceLearnerConfig sequence_learner_from(const Settings& s);

struct SequenceModel {
  Method method = Method::em;
  std::size_t K = 0;
  std::size_t V = 0;
  HmmParams hmm;
  std::vector<double> log_likelihood;  // EM trace
  Policy policy;
  FeatureInterner interner;
  SequenceTaskConfig task;
  std::vector<IterationReport> history;
};

SequenceModel train_sequence_model(const std::vector<SymbolSequence>& data, std::size_t V,
                                   const SequenceLearnerConfig& cfg);
// Latent labelings of every sequence (Viterbi for EM, a policy run for SEARN).
std::vector<std::vector<int>> label_sequences(const SequenceModel& model,
                                              const std::vector<SymbolSequence>& data,
                                              std::uint64_t seed, bool posterior_decode = false);
// Pooled matched Hamming error of a model trained on `data` with gold labels.
double sequence_error(const std::vector<LabeledSequence>& data, std::size_t V,
                      const SequenceLearnerConfig& cfg);

// ---------------------------------------------------------------------------
// Parsing experiments

struct ParserTrainConfig {
  Method method = Method::searn_lr;
  Supervision supervision = Supervision::sup;
  std::size_t tagset_size = 12;
  double beta = 0.1;
  std::size_t n_samples = 1;
  std::size_t iterations = 10;
  std::size_t patience = 3;
  double tree_variance = 10.0;
  double word_variance = 10.0;
  double nb_smoothing = 1e-2;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

ParserTrainConfig parser_config_from(const Settings& s);

struct TrainedParser {
  Policy policy;
  FeatureInterner interner;
  std::vector<IterationReport> history;
  std::size_t best_iteration = 0;
};

TrainedParser train_parser(const std::vector<TaggedSentence>& train, const ParserTrainConfig& cfg,
                           const std::vector<TaggedSentence>* dev = nullptr);
std::vector<DependencyTree> parse_all(const Policy& policy, const FeatureInterner& interner,
                                      const std::vector<TaggedSentence>& sentences,
                                      std::size_t tagset_size, std::uint64_t seed);
// Pooled directed arc accuracy against the gold trees.
double parser_accuracy(const Policy& policy, const FeatureInterner& interner,
                       const std::vector<TaggedSentence>& sentences, std::size_t tagset_size,
                       std::uint64_t seed);
// Accuracy of uniformly random legal parsing.
double random_parser_accuracy(const std::vector<TaggedSentence>& sentences, std::size_t tagset_size,
                              std::uint64_t seed);

// Keeps the gold trees of the first `labeled` sentences and drops the rest.
std::vector<TaggedSentence> with_labels(const std::vector<TaggedSentence>& sentences,
                                        std::size_t labeled);

struct CurvePoint {
  std::string mode;  // unsup, sup, semi
  std::size_t labeled = 0;
  std::vector<double> accuracy;  // one per seed
};

std::vector<CurvePoint> learning_curve(const std::vector<TaggedSentence>& train,
                                       const std::vector<TaggedSentence>& test,
                                       const std::vector<std::size_t>& labeled_counts,
                                       const std::vector<std::uint64_t>& seeds,
                                       const ParserTrainConfig& base);

// ---------------------------------------------------------------------------
// Commands. Each reads everything it needs from the config and writes its
// results under the `out` directory. Errors are thrown as searn::Error.

struct CommandResult {
  std::string summary;  // human-readable report for stdout
  bool ok = true;       // false when a checked property failed (equivalence)
};

CommandResult cmd_gen(const Config& cfg);
CommandResult cmd_train(const Config& cfg);
CommandResult cmd_eval(const Config& cfg);
CommandResult cmd_learning_curve(const Config& cfg);
CommandResult cmd_equivalence(const Config& cfg);

}  // namespace searn
