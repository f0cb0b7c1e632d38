#include "blocklex/sparse.hpp"

#include <algorithm>

#include "blocklex/error.hpp"

namespace blocklex {

void SparseVector::push_back(uint32_t index, double value) {
  if (index >= dim) Error::config("sparse index out of range");
  if (!entries.empty() && entries.back().first >= index)
    Error::config("sparse indices must be strictly increasing");
  if (value != 0.0) entries.emplace_back(index, value);
}

double SparseVector::at(uint32_t index) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const auto& e, uint32_t i) { return e.first < i; });
  if (it != entries.end() && it->first == index) return it->second;
  return 0.0;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> dense(dim, 0.0);
  for (const auto& [i, v] : entries) dense[i] = v;
  return dense;
}

SparseVector SparseVector::from_dense(const std::vector<double>& dense) {
  SparseVector v;
  v.dim = static_cast<uint32_t>(dense.size());
  for (uint32_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.entries.emplace_back(i, dense[i]);
  }
  return v;
}

}  // namespace blocklex
