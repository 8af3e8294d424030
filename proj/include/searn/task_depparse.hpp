#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "searn/data.hpp"
#include "searn/policy.hpp"
#include "searn/task.hpp"

namespace searn {

enum ParserAction : int { kLeftArc = 0, kRightArc = 1, kReduce = 2, kShift = 3 };
constexpr std::size_t kNumParserActions = 4;

const char* parser_action_name(int action);

// Arc-eager configuration over tokens 1..T (0 is the root).
struct ParserState {
  std::vector<int> stack;  // back() is the top
  int i = 1;               // next input position, in [1, T + 1]
  std::vector<int> heads;  // heads[d] for d in 0..T; -1 while headless

  static ParserState initial(std::size_t T);

  std::size_t length() const { return heads.empty() ? 0 : heads.size() - 1; }
  bool has_head(int d) const { return heads[static_cast<std::size_t>(d)] >= 0; }
  bool is_final() const { return i > static_cast<int>(length()); }
  bool operator==(const ParserState&) const = default;
};

std::vector<int> legal_actions(const ParserState& s);
bool is_legal(const ParserState& s, int action);
// Throws a state error naming the violated precondition.
ParserState apply_action(const ParserState& s, int action);
// Headless tokens attach to the root.
DependencyTree finalize(const ParserState& s);
// Runs a complete action sequence from the initial state.
DependencyTree tree_from_actions(std::size_t T, std::span<const int> actions);

// Static arc-eager oracle for a projective gold tree.
int supervised_oracle(const ParserState& s, const DependencyTree& gold);

std::vector<std::pair<std::string, double>> tree_features(const ParserState& s,
                                                          std::span<const int> tags);
// Features for producing the tag of token d (1-based) from a finished tree.
std::vector<std::pair<std::string, double>> word_features(const DependencyTree& tree,
                                                          std::span<const int> tags, int d);

// Fraction of tokens whose predicted head matches the gold head.
double arc_accuracy(const DependencyTree& pred, const DependencyTree& gold);

enum class Supervision { unsup, sup, semi };

struct DepParseConfig {
  std::size_t tagset_size = 12;
  Supervision supervision = Supervision::unsup;
};

class DepParseTask final : public Task {
 public:
  static constexpr std::size_t kTreeSlot = 0;
  static constexpr std::size_t kWordSlot = 1;

  DepParseTask(std::vector<TaggedSentence> sentences, DepParseConfig config);

  const DepParseConfig& config() const { return config_; }
  const std::vector<TaggedSentence>& sentences() const { return sentences_; }

  std::size_t size() const override { return sentences_.size(); }
  std::size_t num_slots() const override { return 2; }
  std::size_t slot_classes(std::size_t slot) const override {
    return slot == kTreeSlot ? kNumParserActions : config_.tagset_size;
  }
  std::size_t max_decisions(std::size_t example) const override {
    return 3 * sentences_.at(example).size();
  }
  double run(std::size_t example, Decider& decider) const override;
  std::uint64_t example_key(std::size_t example) const override;

  // Whether example uses the arc loss (labeled) or the reconstruction loss.
  bool labeled(std::size_t example) const;

 private:
  std::vector<TaggedSentence> sentences_;
  DepParseConfig config_;
  std::vector<int> tag_legal_;
};

// Runs the parsing phase of `policy` on a sentence.
DependencyTree parse_sentence(const TaggedSentence& sentence, const Policy& policy,
                              std::uint64_t seed, const FeatureInterner& interner,
                              std::size_t tagset_size);

}  // namespace searn
