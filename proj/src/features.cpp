#include "searn/features.hpp"

#include <algorithm>
#include <mutex>

#include "searn/error.hpp"

namespace searn {

FeatureInterner::FeatureInterner(const FeatureInterner& other) {
  std::shared_lock lock(other.mutex_);
  ids_ = other.ids_;
  names_ = other.names_;
}

FeatureInterner& FeatureInterner::operator=(const FeatureInterner& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_);
  std::shared_lock other_lock(other.mutex_);
  ids_ = other.ids_;
  names_ = other.names_;
  return *this;
}

std::optional<FeatureId> FeatureInterner::find(std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

FeatureId FeatureInterner::intern(std::string_view name) {
  {
    std::shared_lock lock(mutex_);
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  auto id = static_cast<FeatureId>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::size_t FeatureInterner::size() const {
  std::shared_lock lock(mutex_);
  return names_.size();
}

std::string FeatureInterner::name(FeatureId id) const {
  std::shared_lock lock(mutex_);
  require(id < names_.size(), ErrorKind::parameter,
          "feature id " + std::to_string(id) + " out of range");
  return names_[id];
}

std::vector<std::string> FeatureInterner::names() const {
  std::shared_lock lock(mutex_);
  return {names_.begin(), names_.end()};
}

void FeatureInterner::canonicalize(FeatureId first_new,
                                   std::span<FeatureVector* const> vectors) {
  std::unique_lock lock(mutex_);
  const auto total = static_cast<FeatureId>(names_.size());
  if (first_new >= total) return;

  constexpr FeatureId unassigned = ~FeatureId{0};
  std::vector<FeatureId> remap(total - first_new, unassigned);
  FeatureId next = first_new;
  for (const FeatureVector* v : vectors) {
    for (const auto& [id, value] : v->entries) {
      if (id >= first_new && remap[id - first_new] == unassigned) {
        remap[id - first_new] = next++;
      }
    }
  }
  // Names interned but never stored keep their relative order.
  for (auto& r : remap) {
    if (r == unassigned) r = next++;
  }

  std::vector<std::string> reordered(total - first_new);
  for (FeatureId old = first_new; old < total; ++old) {
    reordered[remap[old - first_new] - first_new] = std::move(names_[old]);
  }
  names_.resize(first_new);
  for (FeatureId i = first_new; i < total; ++i) names_.push_back(std::move(reordered[i - first_new]));
  ids_.clear();
  for (FeatureId i = 0; i < total; ++i) ids_.emplace(names_[i], i);

  for (FeatureVector* v : vectors) {
    bool touched = false;
    for (auto& [id, value] : v->entries) {
      if (id >= first_new) {
        id = remap[id - first_new];
        touched = true;
      }
    }
    if (touched) std::sort(v->entries.begin(), v->entries.end());
  }
}

namespace {

FeatureVector finish(std::vector<std::pair<FeatureId, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  FeatureVector out;
  out.entries.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.entries.empty() && out.entries.back().first == e.first) {
      out.entries.back().second += e.second;
    } else {
      out.entries.push_back(e);
    }
  }
  std::erase_if(out.entries, [](const auto& e) { return e.second == 0.0; });
  return out;
}

}  // namespace

FeatureVector FeatureBuilder::resolve(FeatureInterner& interner, bool insert) const {
  if (!insert) return resolve(static_cast<const FeatureInterner&>(interner));
  std::vector<std::pair<FeatureId, double>> entries;
  entries.reserve(raw_.size());
  for (const auto& [name, value] : raw_) entries.emplace_back(interner.intern(name), value);
  return finish(std::move(entries));
}

FeatureVector FeatureBuilder::resolve(const FeatureInterner& interner) const {
  std::vector<std::pair<FeatureId, double>> entries;
  entries.reserve(raw_.size());
  for (const auto& [name, value] : raw_) {
    if (auto id = interner.find(name)) entries.emplace_back(*id, value);
  }
  return finish(std::move(entries));
}

}  // namespace searn
