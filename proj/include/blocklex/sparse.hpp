#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace blocklex {

// Sparse vector over a declared dimensionality: sorted (index, value) pairs
// with strictly increasing indices and nonzero values. The universal feature
// representation across the toolkit.
struct SparseVector {
  uint32_t dim = 0;
  std::vector<std::pair<uint32_t, double>> entries;

  size_t nnz() const { return entries.size(); }

  // Appends an entry; index must exceed the last stored index. Zero values
  // are dropped.
  void push_back(uint32_t index, double value);

  // Value at an index, 0 for indices not stored. Binary search.
  double at(uint32_t index) const;

  std::vector<double> to_dense() const;
  static SparseVector from_dense(const std::vector<double>& dense);

  bool operator==(const SparseVector&) const = default;
};

}  // namespace blocklex
