#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace searn {

using FeatureId = std::uint32_t;

// Sparse feature vector, entries sorted by id, no zero values.
struct FeatureVector {
  std::vector<std::pair<FeatureId, double>> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  bool operator==(const FeatureVector&) const = default;
};

// Maps feature names to dense ids. Shared by every classifier of one run so
// that mixtures of classifiers from different iterations agree on ids.
// Lookups may run concurrently with interning.
class FeatureInterner {
 public:
  FeatureInterner() = default;
  FeatureInterner(const FeatureInterner& other);
  FeatureInterner& operator=(const FeatureInterner& other);

  std::optional<FeatureId> find(std::string_view name) const;
  FeatureId intern(std::string_view name);

  std::size_t size() const;
  std::string name(FeatureId id) const;
  std::vector<std::string> names() const;

  // Renumbers ids >= first_new in order of first appearance across
  // `vectors` (visited in the given order). Makes ids independent of the
  // interleaving of concurrent intern() calls.
  void canonicalize(FeatureId first_new, std::span<FeatureVector* const> vectors);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, FeatureId, Hash, std::equal_to<>> ids_;
  std::deque<std::string> names_;
};

// Collects named features; resolved against an interner once complete.
// Repeated names accumulate (multiset count features).
class FeatureBuilder {
 public:
  void add(std::string name, double value = 1.0) {
    if (value != 0.0) raw_.emplace_back(std::move(name), value);
  }

  const std::vector<std::pair<std::string, double>>& raw() const { return raw_; }
  void clear() { raw_.clear(); }

  // Unknown names are interned when `insert` is set, dropped otherwise.
  FeatureVector resolve(FeatureInterner& interner, bool insert) const;
  FeatureVector resolve(const FeatureInterner& interner) const;

 private:
  std::vector<std::pair<std::string, double>> raw_;
};

}  // namespace searn
