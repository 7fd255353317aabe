#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace copred {

// A set of type ids, stored sorted and unique.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<int> ids) : ids_(ids) { normalize(); }
  explicit LabelSet(std::vector<int> ids) : ids_(std::move(ids)) { normalize(); }

  void insert(int id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }

  void erase(int id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) ids_.erase(it);
  }

  bool contains(int id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<int>& ids() const { return ids_; }

  bool operator==(const LabelSet& other) const = default;

  bool is_subset_of(const LabelSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
  }

  friend LabelSet set_union(const LabelSet& a, const LabelSet& b) {
    LabelSet out;
    std::set_union(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                   std::back_inserter(out.ids_));
    return out;
  }

  friend LabelSet set_intersection(const LabelSet& a, const LabelSet& b) {
    LabelSet out;
    std::set_intersection(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                          std::back_inserter(out.ids_));
    return out;
  }

  friend LabelSet set_difference(const LabelSet& a, const LabelSet& b) {
    LabelSet out;
    std::set_difference(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                        std::back_inserter(out.ids_));
    return out;
  }

 private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  std::vector<int> ids_;
};

}  // namespace copred
