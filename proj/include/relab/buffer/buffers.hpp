#pragma once

#include <optional>
#include <vector>

#include "relab/buffer/sum_tree.hpp"
#include "relab/buffer/transition.hpp"
#include "relab/rng.hpp"

namespace relab::buffer {

/**
 * Uniform experience replay over a fixed-capacity ring. Once full, every
 * store overwrites the oldest transition. sample() draws indices uniformly
 * with replacement.
 */
class ReplayBuffer {
public:
  explicit ReplayBuffer(int capacity);

  void store(Transition t);
  std::vector<Transition> sample(int batch_size, Rng& rng) const;

  int size() const { return size_; }
  int capacity() const { return capacity_; }

  /// Test hook: transitions in age order, oldest first.
  const Transition& at_age(int i) const;

private:
  int capacity_ = 0;
  int size_ = 0;
  int head_ = 0;  ///< next slot to overwrite
  std::vector<Transition> data_;
};

/// Batch drawn from a PerBuffer: transition, slot index and importance weight
/// travel together so priorities can be written back after the update.
struct PerSample {
  std::vector<Transition> transitions;
  std::vector<int> indices;
  std::vector<double> weights;  ///< normalized so max weight in batch is 1
};

/**
 * Proportional prioritized replay.
 *
 * Priorities are stored as (|delta| + epsilon)^alpha in a sum tree; new
 * transitions enter with the current maximum priority so they are sampled at
 * least once. sample() is stratified: [0, total) is split into batch_size
 * equal segments and one value is drawn uniformly inside each. Importance
 * weights are (N * P(i))^-beta divided by the largest weight in the batch.
 */
class PerBuffer {
public:
  PerBuffer(int capacity, double alpha, double epsilon = 1e-6);

  void store(Transition t);
  PerSample sample(int batch_size, double beta, Rng& rng) const;

  /// Writes back |delta| for the given slots; priority becomes (|delta|+eps)^alpha.
  void update_priorities(const std::vector<int>& indices, const std::vector<double>& deltas);

  int size() const { return size_; }
  int capacity() const { return capacity_; }
  double priority_of(int index) const { return tree_.priority(index); }

private:
  int capacity_ = 0;
  int size_ = 0;
  int head_ = 0;
  double alpha_ = 0.6;
  double epsilon_ = 1e-6;
  double max_priority_ = 1.0;  ///< already exponentiated by alpha
  std::vector<Transition> data_;
  SumTree tree_;
};

/// Append-only store for on-policy agents; drain() hands back everything in
/// insertion order and clears the buffer.
class RolloutBuffer {
public:
  void store(Transition t) { data_.push_back(std::move(t)); }
  std::vector<Transition> drain();
  int size() const { return static_cast<int>(data_.size()); }
  const Transition& at(int i) const { return data_.at(i); }

private:
  std::vector<Transition> data_;
};

/**
 * Aggregates consecutive transitions of one trajectory into non-overlapping
 * n-step blocks: state/action from the first step, reward = sum gamma^i r_i,
 * next_state/done/truncated from the last, n_steps = number of steps merged.
 * A block is emitted when n steps have accumulated or the episode ends, so
 * with gamma = 1 the emitted rewards conserve the raw reward sum exactly.
 */
class MultistepQueue {
public:
  MultistepQueue(int n_steps, double gamma);

  /// Feeds one step; returns the aggregated transition once a block completes.
  std::optional<Transition> push(const Transition& t);

  /// Emits the pending partial block, if any (used when a run stops mid-window).
  std::optional<Transition> flush();

  int pending() const { return static_cast<int>(window_.size()); }

private:
  Transition aggregate() const;

  int n_steps_ = 1;
  double gamma_ = 0.99;
  std::vector<Transition> window_;
};

}  // namespace relab::buffer
