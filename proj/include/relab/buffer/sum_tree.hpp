#pragma once

#include <vector>

namespace relab::buffer {

/**
 * Binary indexed sum tree over `capacity` priority slots.
 *
 * Stored as a flat array with the leaf count rounded up to a power of two;
 * node i has children 2i+1 and 2i+2 and holds the sum of its subtree.
 * update() adjusts one leaf and propagates the delta to the root in O(log n);
 * query(v) walks from the root to the unique leaf whose prefix-sum interval
 * contains v.
 */
class SumTree {
public:
  explicit SumTree(int capacity);

  /// Sets the priority of slot `index`; negative priorities are invalid.
  void update(int index, double priority);

  double priority(int index) const;

  /// Sum of all priorities.
  double total() const { return nodes_[0]; }

  /**
   * Finds the leaf l with sum(priorities[0..l)) <= value < sum(priorities[0..l]).
   * `value` must lie in [0, total()); querying an all-zero tree is a state error.
   */
  int query(double value) const;

  int capacity() const { return capacity_; }

  /// Test hook: direct read-only view of the node array.
  const std::vector<double>& nodes() const { return nodes_; }

private:
  int capacity_ = 0;
  int leaf_count_ = 0;  ///< power of two >= capacity_
  std::vector<double> nodes_;
};

}  // namespace relab::buffer
