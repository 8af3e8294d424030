#include "searn/task_sequence.hpp"

#include "searn/error.hpp"

namespace searn {

namespace {

std::string symbol_or(std::span<const int> x, std::ptrdiff_t pos) {
  if (pos < 0) return "BOS";
  if (pos >= static_cast<std::ptrdiff_t>(x.size())) return "EOS";
  return std::to_string(x[static_cast<std::size_t>(pos)]);
}

void latent_features(std::span<const int> x, std::span<const int> labels, std::size_t t,
                     const SequenceTaskConfig& cfg, FeatureBuilder& fb) {
  const auto p = static_cast<std::ptrdiff_t>(t);
  fb.add("bias");
  fb.add("prev=" + (t == 0 ? std::string("BOS") : std::to_string(labels[t - 1])));
  fb.add("x0=" + std::to_string(x[t]));
  if (cfg.feature_mode == SequenceFeatures::lr_window) {
    fb.add("x-1=" + symbol_or(x, p - 1));
    fb.add("x+1=" + symbol_or(x, p + 1));
  }
}

void emit_features(std::span<const int> labels, std::size_t t, const SequenceTaskConfig& cfg,
                   FeatureBuilder& fb) {
  fb.add("emit_label=" + std::to_string(labels[t]));
  if (cfg.wide_emit) {
    fb.add("emit_prev=" + symbol_or(labels, static_cast<std::ptrdiff_t>(t) - 1));
    fb.add("emit_next=" + symbol_or(labels, static_cast<std::ptrdiff_t>(t) + 1));
  }
}

}  // namespace

std::vector<std::pair<std::string, double>> seq_features(std::span<const int> x,
                                                         std::span<const int> labels,
                                                         std::size_t t,
                                                         const SequenceTaskConfig& config) {
  const std::size_t T = x.size();
  require(t >= 1 && t <= 2 * T, ErrorKind::parameter, "decision index out of range");
  FeatureBuilder fb;
  if (t <= T) {
    require(labels.size() >= t - 1, ErrorKind::parameter, "missing earlier labels");
    latent_features(x, labels, t - 1, config, fb);
  } else {
    require(labels.size() >= T, ErrorKind::parameter, "missing latent labels");
    emit_features(labels.first(T), t - T - 1, config, fb);
  }
  return fb.raw();
}

double seq_loss(std::span<const int> x, std::span<const int> reconstruction) {
  require(x.size() == reconstruction.size(), ErrorKind::data,
          "reconstruction length differs from the input");
  require(!x.empty(), ErrorKind::data, "empty sequence");
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < x.size(); ++t) wrong += x[t] != reconstruction[t] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(x.size());
}

SequenceTask::SequenceTask(std::vector<SymbolSequence> data, SequenceTaskConfig config)
    : data_(std::move(data)), config_(config) {
  require(config_.K >= 1, ErrorKind::config, "latent label count K must be positive");
  require(config_.V >= 2, ErrorKind::config, "vocabulary size V must be at least 2");
  for (std::size_t n = 0; n < data_.size(); ++n) {
    require(!data_[n].symbols.empty(), ErrorKind::data,
            "sequence " + std::to_string(n) + " is empty");
    for (int s : data_[n].symbols) {
      if (s < 0 || static_cast<std::size_t>(s) >= config_.V) {
        fail(ErrorKind::data, "sequence " + std::to_string(n) + " has symbol " +
                                  std::to_string(s) + " outside [0, V)");
      }
    }
  }
  for (std::size_t k = 0; k < config_.K; ++k) latent_legal_.push_back(static_cast<int>(k));
  for (std::size_t v = 0; v < config_.V; ++v) emit_legal_.push_back(static_cast<int>(v));
}

double SequenceTask::run(std::size_t example, Decider& decider) const {
  const auto& x = data_.at(example).symbols;
  const std::size_t T = x.size();
  std::vector<int> labels;
  labels.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto f = [&](FeatureBuilder& fb) { latent_features(x, labels, t, config_, fb); };
    ChoiceDecision d;
    d.slot = kLatentSlot;
    d.num_actions = config_.K;
    d.legal = latent_legal_;
    d.reference = Reference::uniform;
    d.features = f;
    labels.push_back(decider.choose(d));
  }
  std::vector<int> out;
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto f = [&](FeatureBuilder& fb) { emit_features(labels, t, config_, fb); };
    ChoiceDecision d;
    d.slot = kEmitSlot;
    d.num_actions = config_.V;
    d.legal = emit_legal_;
    d.reference = Reference::action;
    d.reference_action = x[t];
    d.features = f;
    out.push_back(decider.choose(d));
  }
  return seq_loss(x, out);
}

}  // namespace searn
