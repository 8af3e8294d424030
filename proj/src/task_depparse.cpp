#include "searn/task_depparse.hpp"

#include <algorithm>

#include "searn/error.hpp"
#include "searn/searn.hpp"

namespace searn {

namespace {

std::string tag_at(std::span<const int> tags, int pos) {
  if (pos < 1) return "<s>";
  if (pos > static_cast<int>(tags.size())) return "</s>";
  return std::to_string(tags[static_cast<std::size_t>(pos - 1)]);
}

std::string head_tag(std::span<const int> tags, int head) {
  return head == 0 ? std::string("ROOT") : tag_at(tags, head);
}

const char* distance_bucket(int d) {
  if (d <= 1) return "1";
  if (d == 2) return "2";
  if (d == 3) return "3";
  if (d <= 6) return "4-6";
  return "7+";
}

void add_tree_features(const ParserState& s, std::span<const int> tags, FeatureBuilder& fb) {
  const int i = s.i;
  const int T = static_cast<int>(s.length());
  for (int off = -2; off <= 2; ++off) fb.add("i" + std::to_string(off) + "=" + tag_at(tags, i + off));
  auto arcs = [&](const std::string& name, int tok) {
    if (s.has_head(tok)) fb.add(name + "_head=" + head_tag(tags, s.heads[static_cast<std::size_t>(tok)]));
    for (int d = 1; d <= T; ++d) {
      if (s.heads[static_cast<std::size_t>(d)] == tok) fb.add(name + "_dep=" + tag_at(tags, d));
    }
  };
  arcs("i", i);
  if (s.stack.empty()) {
    fb.add("stack=null");
    return;
  }
  const int t = s.stack.back();
  for (int off = -2; off <= 2; ++off) fb.add("t" + std::to_string(off) + "=" + tag_at(tags, t + off));
  fb.add("pair=" + tag_at(tags, t) + "," + tag_at(tags, i));
  fb.add(std::string("dist=") + distance_bucket(i - t));
  arcs("t", t);
}

void add_word_features(const DependencyTree& tree, std::span<const int> tags, int d,
                       FeatureBuilder& fb) {
  const int T = static_cast<int>(tree.size());
  auto head_of = [&](int tok) { return tree.heads[static_cast<std::size_t>(tok - 1)]; };
  fb.add("bias");
  const int parent = head_of(d);
  fb.add("parent=" + head_tag(tags, parent));
  if (parent != 0) {
    const int grand = head_of(parent);
    fb.add("grand=" + head_tag(tags, grand));
    for (int a = 1; a <= T; ++a) {
      if (a != parent && head_of(a) == grand) fb.add("aunt=" + tag_at(tags, a));
    }
  }
  for (int c = 1; c <= T; ++c) {
    if (head_of(c) == d) fb.add("daughter=" + tag_at(tags, c));
  }
}

}  // namespace

const char* parser_action_name(int action) {
  switch (action) {
    case kLeftArc: return "LeftArc";
    case kRightArc: return "RightArc";
    case kReduce: return "Reduce";
    case kShift: return "Shift";
    default: return "?";
  }
}

ParserState ParserState::initial(std::size_t T) {
  ParserState s;
  s.heads.assign(T + 1, -1);
  s.heads[0] = 0;
  return s;
}

bool is_legal(const ParserState& s, int action) {
  const bool input = s.i <= static_cast<int>(s.length());
  const bool stack = !s.stack.empty();
  switch (action) {
    case kLeftArc: return stack && input && !s.has_head(s.stack.back());
    case kRightArc: return stack && input && !s.has_head(s.i);
    case kReduce: return stack && s.has_head(s.stack.back());
    case kShift: return input;
    default: return false;
  }
}

std::vector<int> legal_actions(const ParserState& s) {
  std::vector<int> out;
  for (int a = 0; a < static_cast<int>(kNumParserActions); ++a) {
    if (is_legal(s, a)) out.push_back(a);
  }
  return out;
}

ParserState apply_action(const ParserState& s, int action) {
  const bool input = s.i <= static_cast<int>(s.length());
  auto need = [&](bool ok, const char* what) {
    if (!ok) {
      fail(ErrorKind::state, std::string(parser_action_name(action)) + " is illegal: " + what);
    }
  };
  ParserState n = s;
  switch (action) {
    case kLeftArc:
      need(!s.stack.empty(), "the stack is empty");
      need(input, "the input is exhausted");
      need(!s.has_head(s.stack.back()), "the stack top already has a head");
      n.heads[static_cast<std::size_t>(s.stack.back())] = s.i;
      n.stack.pop_back();
      break;
    case kRightArc:
      need(!s.stack.empty(), "the stack is empty");
      need(input, "the input is exhausted");
      need(!s.has_head(s.i), "the next input token already has a head");
      n.heads[static_cast<std::size_t>(s.i)] = s.stack.back();
      n.stack.push_back(s.i);
      ++n.i;
      break;
    case kReduce:
      need(!s.stack.empty(), "the stack is empty");
      need(s.has_head(s.stack.back()), "the stack top has no head");
      n.stack.pop_back();
      break;
    case kShift:
      need(input, "the input is exhausted");
      n.stack.push_back(s.i);
      ++n.i;
      break;
    default:
      fail(ErrorKind::state, "unknown parser action " + std::to_string(action));
  }
  return n;
}

DependencyTree finalize(const ParserState& s) {
  require(s.is_final(), ErrorKind::state, "the parser has not consumed its input");
  DependencyTree tree;
  const std::size_t T = s.length();
  tree.heads.resize(T);
  for (std::size_t d = 1; d <= T; ++d) tree.heads[d - 1] = std::max(s.heads[d], 0);
  require(is_valid_tree(tree), ErrorKind::internal, "parser produced an invalid tree");
  return tree;
}

DependencyTree tree_from_actions(std::size_t T, std::span<const int> actions) {
  ParserState s = ParserState::initial(T);
  for (int a : actions) s = apply_action(s, a);
  return finalize(s);
}

int supervised_oracle(const ParserState& s, const DependencyTree& gold) {
  require(gold.size() == s.length(), ErrorKind::parameter, "gold tree length differs");
  auto gold_head = [&](int d) { return gold.heads[static_cast<std::size_t>(d - 1)]; };
  const int T = static_cast<int>(s.length());
  const int i = s.i;
  if (!s.stack.empty() && i <= T) {
    const int t = s.stack.back();
    if (gold_head(t) == i && !s.has_head(t)) return kLeftArc;
    if (gold_head(i) == t) return kRightArc;
  }
  if (!s.stack.empty() && s.has_head(s.stack.back())) {
    const int t = s.stack.back();
    bool pending = false;
    for (int d = std::max(i, 1); d <= T && !pending; ++d) pending = gold_head(d) == t;
    if (!pending || i > T) return kReduce;
  }
  if (i <= T) return kShift;
  fail(ErrorKind::state, "no action is available in a final state");
}

std::vector<std::pair<std::string, double>> tree_features(const ParserState& s,
                                                          std::span<const int> tags) {
  FeatureBuilder fb;
  add_tree_features(s, tags, fb);
  return fb.raw();
}

std::vector<std::pair<std::string, double>> word_features(const DependencyTree& tree,
                                                          std::span<const int> tags, int d) {
  require(d >= 1 && d <= static_cast<int>(tree.size()), ErrorKind::parameter,
          "token index out of range");
  FeatureBuilder fb;
  add_word_features(tree, tags, d, fb);
  return fb.raw();
}

double arc_accuracy(const DependencyTree& pred, const DependencyTree& gold) {
  require(pred.size() == gold.size(), ErrorKind::data, "trees differ in length");
  require(!gold.heads.empty(), ErrorKind::data, "empty tree");
  std::size_t right = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) right += pred.heads[d] == gold.heads[d] ? 1 : 0;
  return static_cast<double>(right) / static_cast<double>(gold.size());
}

DepParseTask::DepParseTask(std::vector<TaggedSentence> sentences, DepParseConfig config)
    : sentences_(std::move(sentences)), config_(config) {
  require(config_.tagset_size >= 2, ErrorKind::config, "tagset size must be at least 2");
  for (std::size_t n = 0; n < sentences_.size(); ++n) {
    const auto& s = sentences_[n];
    const std::string where = "sentence " + std::to_string(n);
    require(!s.tags.empty(), ErrorKind::data, where + " is empty");
    for (int tag : s.tags) {
      if (tag < 0 || static_cast<std::size_t>(tag) >= config_.tagset_size) {
        fail(ErrorKind::data, where + " has tag " + std::to_string(tag) + " outside the tagset");
      }
    }
    if (s.gold) {
      require(s.gold->size() == s.size() && is_valid_tree(*s.gold), ErrorKind::data,
              where + " has an invalid gold tree");
      require(is_projective(*s.gold), ErrorKind::data, where + " has a non-projective gold tree");
    } else if (config_.supervision == Supervision::sup) {
      fail(ErrorKind::data, where + " has no gold tree but training is supervised");
    }
  }
  for (std::size_t k = 0; k < config_.tagset_size; ++k) tag_legal_.push_back(static_cast<int>(k));
}

bool DepParseTask::labeled(std::size_t example) const {
  switch (config_.supervision) {
    case Supervision::unsup: return false;
    case Supervision::sup: return true;
    case Supervision::semi: return sentences_.at(example).gold.has_value();
  }
  return false;
}

std::uint64_t DepParseTask::example_key(std::size_t example) const { return example; }

double DepParseTask::run(std::size_t example, Decider& decider) const {
  const auto& sent = sentences_.at(example);
  const std::span<const int> tags = sent.tags;
  const bool sup = labeled(example);

  ParserState s = ParserState::initial(sent.size());
  while (!s.is_final()) {
    const auto legal = legal_actions(s);
    auto f = [&](FeatureBuilder& fb) { add_tree_features(s, tags, fb); };
    ChoiceDecision d;
    d.slot = kTreeSlot;
    d.num_actions = kNumParserActions;
    d.legal = legal;
    if (sup) {
      d.reference = Reference::action;
      d.reference_action = supervised_oracle(s, *sent.gold);
    } else {
      d.reference = Reference::uniform;
    }
    d.features = f;
    s = apply_action(s, decider.choose(d));
  }
  const DependencyTree tree = finalize(s);
  if (sup) return 1.0 - arc_accuracy(tree, *sent.gold);

  std::size_t wrong = 0;
  for (int tok = 1; tok <= static_cast<int>(sent.size()); ++tok) {
    auto f = [&](FeatureBuilder& fb) { add_word_features(tree, tags, tok, fb); };
    ChoiceDecision d;
    d.slot = kWordSlot;
    d.num_actions = config_.tagset_size;
    d.legal = tag_legal_;
    d.reference = Reference::action;
    d.reference_action = tags[static_cast<std::size_t>(tok - 1)];
    d.features = f;
    wrong += decider.choose(d) != d.reference_action ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(sent.size());
}

DependencyTree parse_sentence(const TaggedSentence& sentence, const Policy& policy,
                              std::uint64_t seed, const FeatureInterner& interner,
                              std::size_t tagset_size) {
  // Unsupervised mode never reads the gold tree, and the parsing phase
  // comes first, so the tree decisions are the parse.
  TaggedSentence bare{sentence.tags, std::nullopt};
  DepParseTask task({bare}, {tagset_size, Supervision::unsup});
  Trajectory traj = run_policy(task, 0, policy, seed, interner, false);
  std::vector<int> actions;
  for (const auto& d : traj.decisions) {
    if (d.slot == DepParseTask::kTreeSlot) actions.push_back(d.action);
  }
  return tree_from_actions(sentence.size(), actions);
}

}  // namespace searn
