#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace superinfect {

/// Binary indexed tree over nonnegative integer weights with
/// weighted index sampling.
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(std::size_t n) : tree_(n + 1, 0), values_(n, 0) {
    top_bit_ = 1;
    while (top_bit_ * 2 <= n) top_bit_ *= 2;
  }

  std::size_t size() const { return values_.size(); }
  std::int64_t total() const { return total_; }
  std::int64_t value(std::size_t i) const { return values_[i]; }

  void add(std::size_t i, std::int64_t delta) {
    values_[i] += delta;
    total_ += delta;
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
  }

  void set(std::size_t i, std::int64_t v) { add(i, v - values_[i]); }

  /// For 0 <= k < total(): the index i with prefix(i) <= k < prefix(i + 1),
  /// and the offset k - prefix(i) into that index's weight.
  std::pair<std::size_t, std::int64_t> find(std::int64_t k) const {
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= k) {
        pos = next;
        k -= tree_[next];
      }
    }
    return {pos, k};
  }

 private:
  std::vector<std::int64_t> tree_;
  std::vector<std::int64_t> values_;
  std::int64_t total_ = 0;
  std::size_t top_bit_ = 0;
};

/// Set of node indices with O(1) insert, erase and uniform pick.
class IndexedSet {
 public:
  explicit IndexedSet(std::size_t capacity = 0) : position_(capacity, kAbsent) {}

  std::size_t size() const { return items_.size(); }
  bool contains(std::uint32_t v) const { return position_[v] != kAbsent; }
  std::uint32_t operator[](std::size_t i) const { return items_[i]; }

  void insert(std::uint32_t v) {
    if (contains(v)) return;
    position_[v] = items_.size();
    items_.push_back(v);
  }

  void erase(std::uint32_t v) {
    const std::size_t pos = position_[v];
    if (pos == kAbsent) return;
    const std::uint32_t last = items_.back();
    items_[pos] = last;
    position_[last] = pos;
    items_.pop_back();
    position_[v] = kAbsent;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> position_;
  std::vector<std::uint32_t> items_;
};

}  // namespace superinfect
