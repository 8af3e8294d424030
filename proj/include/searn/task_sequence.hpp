#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "searn/data.hpp"
#include "searn/task.hpp"

namespace searn {

enum class SequenceFeatures {
  nb_hmm,     // previous label and the current symbol
  lr_window,  // additionally the neighbouring symbols x_{t-1}, x_{t+1}
};

struct SequenceTaskConfig {
  std::size_t K = 2;
  std::size_t V = 2;
  SequenceFeatures feature_mode = SequenceFeatures::nb_hmm;
  // Emission decisions also see the neighbouring latent labels.
  bool wide_emit = false;
};

// Feature names of decision t (1-based, t <= 2T) given the labels chosen so
// far. `labels` must hold at least min(t - 1, T) entries.
std::vector<std::pair<std::string, double>> seq_features(std::span<const int> x,
                                                         std::span<const int> labels,
                                                         std::size_t t,
                                                         const SequenceTaskConfig& config);

// Hamming error of the reconstruction, normalized by T.
double seq_loss(std::span<const int> x, std::span<const int> reconstruction);

// Predict-self sequence labeling: T latent labels, then T symbols.
class SequenceTask final : public Task {
 public:
  static constexpr std::size_t kLatentSlot = 0;
  static constexpr std::size_t kEmitSlot = 1;

  SequenceTask(std::vector<SymbolSequence> data, SequenceTaskConfig config);

  const SequenceTaskConfig& config() const { return config_; }
  const std::vector<SymbolSequence>& data() const { return data_; }

  std::size_t size() const override { return data_.size(); }
  std::size_t num_slots() const override { return 2; }
  std::size_t slot_classes(std::size_t slot) const override {
    return slot == kLatentSlot ? config_.K : config_.V;
  }
  std::size_t max_decisions(std::size_t example) const override {
    return 2 * data_.at(example).size();
  }
  double run(std::size_t example, Decider& decider) const override;

 private:
  std::vector<SymbolSequence> data_;
  SequenceTaskConfig config_;
  std::vector<int> latent_legal_;
  std::vector<int> emit_legal_;
};

}  // namespace searn
