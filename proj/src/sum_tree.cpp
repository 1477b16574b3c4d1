#include "relab/buffer/sum_tree.hpp"

#include <cmath>
#include <string>

#include "relab/error.hpp"

namespace relab::buffer {

SumTree::SumTree(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ParameterError("sum tree: capacity must be positive");
  leaf_count_ = 1;
  while (leaf_count_ < capacity) leaf_count_ *= 2;
  nodes_.assign(static_cast<std::size_t>(2) * leaf_count_ - 1, 0.0);
}

void SumTree::update(int index, double priority) {
  if (index < 0 || index >= capacity_)
    throw BoundsError("sum tree: slot " + std::to_string(index) + " outside capacity " +
                      std::to_string(capacity_));
  if (priority < 0.0 || !std::isfinite(priority))
    throw ParameterError("sum tree: priority must be finite and non-negative");
  int node = leaf_count_ - 1 + index;
  const double delta = priority - nodes_[node];
  nodes_[node] = priority;
  while (node > 0) {
    node = (node - 1) / 2;
    nodes_[node] += delta;
  }
}

double SumTree::priority(int index) const {
  if (index < 0 || index >= capacity_)
    throw BoundsError("sum tree: slot " + std::to_string(index) + " outside capacity " +
                      std::to_string(capacity_));
  return nodes_[leaf_count_ - 1 + index];
}

int SumTree::query(double value) const {
  if (total() <= 0.0) throw StateError("sum tree: query on empty tree");
  if (value < 0.0 || value >= total())
    throw BoundsError("sum tree: query value outside [0, total)");
  int node = 0;
  const int first_leaf = leaf_count_ - 1;
  while (node < first_leaf) {
    const int left = 2 * node + 1;
    if (value < nodes_[left]) {
      node = left;
    } else {
      value -= nodes_[left];
      node = left + 1;
    }
  }
  int index = node - first_leaf;
  // float drift between the root sum and the leaf sums can push a query of
  // nearly total() one leaf too far right; clamp back into the valid range
  if (index >= capacity_) index = capacity_ - 1;
  return index;
}

}  // namespace relab::buffer
