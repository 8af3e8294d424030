#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace searn {

// Bag of words: (word id, count) pairs sorted by word id, counts positive.
struct DocumentCounts {
  std::vector<std::pair<int, int>> counts;
  int total = 0;

  static DocumentCounts from_dense(const std::vector<int>& dense);
  bool operator==(const DocumentCounts&) const = default;
};

struct SymbolSequence {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }
  bool operator==(const SymbolSequence&) const = default;
};

// heads[i] is the head of token i + 1; tokens are 1-based and 0 is the root.
struct DependencyTree {
  std::vector<int> heads;

  std::size_t size() const { return heads.size(); }
  bool operator==(const DependencyTree&) const = default;
};

// Single-headed, every token reaches the root, no cycles.
bool is_valid_tree(const DependencyTree& tree);
// No two arcs cross (the root sits left of token 1).
bool is_projective(const DependencyTree& tree);

struct TaggedSentence {
  std::vector<int> tags;
  std::optional<DependencyTree> gold;

  std::size_t size() const { return tags.size(); }
  bool operator==(const TaggedSentence&) const = default;
};

}  // namespace searn
