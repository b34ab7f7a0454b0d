#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace fracperc {

// Disjoint sets with union by size and path halving.
template <class Index = std::int32_t>
class UnionFind {
 public:
  explicit UnionFind(std::size_t size) : parent_(size), size_(size, 1) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  [[nodiscard]] std::size_t size() const { return parent_.size(); }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
};

}  // namespace fracperc
