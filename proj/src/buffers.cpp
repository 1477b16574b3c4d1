#include "relab/buffer/buffers.hpp"

#include <cmath>
#include <string>

#include "relab/error.hpp"

namespace relab::buffer {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ParameterError("replay buffer: capacity must be positive");
  data_.resize(capacity);
}

void ReplayBuffer::store(Transition t) {
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::vector<Transition> ReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (batch_size <= 0) throw ParameterError("replay buffer: batch size must be positive");
  if (size_ == 0) throw StateError("replay buffer: sample from empty buffer");
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i)
    out.push_back(data_[rng.uniform_int(static_cast<std::uint64_t>(size_))]);
  return out;
}

const Transition& ReplayBuffer::at_age(int i) const {
  if (i < 0 || i >= size_) throw BoundsError("replay buffer: age index out of range");
  const int start = size_ < capacity_ ? 0 : head_;
  return data_[(start + i) % capacity_];
}

PerBuffer::PerBuffer(int capacity, double alpha, double epsilon)
    : capacity_(capacity), alpha_(alpha), epsilon_(epsilon), tree_(capacity) {
  if (capacity <= 0) throw ParameterError("per buffer: capacity must be positive");
  if (alpha < 0.0) throw ParameterError("per buffer: alpha must be non-negative");
  if (epsilon <= 0.0) throw ParameterError("per buffer: epsilon must be positive");
  data_.resize(capacity);
}

void PerBuffer::store(Transition t) {
  data_[head_] = std::move(t);
  tree_.update(head_, max_priority_);
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

PerSample PerBuffer::sample(int batch_size, double beta, Rng& rng) const {
  if (batch_size <= 0) throw ParameterError("per buffer: batch size must be positive");
  if (size_ == 0) throw StateError("per buffer: sample from empty buffer");
  if (beta < 0.0 || beta > 1.0) throw ParameterError("per buffer: beta must lie in [0, 1]");

  PerSample out;
  out.transitions.reserve(batch_size);
  out.indices.reserve(batch_size);
  out.weights.reserve(batch_size);

  const double total = tree_.total();
  const double segment = total / batch_size;
  double max_weight = 0.0;
  for (int i = 0; i < batch_size; ++i) {
    double v = segment * (i + rng.uniform());
    if (v >= total) v = std::nextafter(total, 0.0);
    const int index = tree_.query(v);
    const double p = tree_.priority(index) / total;
    const double w = std::pow(static_cast<double>(size_) * p, -beta);
    out.indices.push_back(index);
    out.weights.push_back(w);
    out.transitions.push_back(data_[index]);
    if (w > max_weight) max_weight = w;
  }
  for (auto& w : out.weights) w /= max_weight;
  return out;
}

void PerBuffer::update_priorities(const std::vector<int>& indices,
                                  const std::vector<double>& deltas) {
  if (indices.size() != deltas.size())
    throw DimensionError("per buffer: indices and deltas differ in length");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double p = std::pow(std::abs(deltas[i]) + epsilon_, alpha_);
    tree_.update(indices[i], p);
    if (p > max_priority_) max_priority_ = p;
  }
}

std::vector<Transition> RolloutBuffer::drain() {
  std::vector<Transition> out;
  out.swap(data_);
  return out;
}

MultistepQueue::MultistepQueue(int n_steps, double gamma) : n_steps_(n_steps), gamma_(gamma) {
  if (n_steps <= 0) throw ParameterError("multistep queue: n_steps must be positive");
  if (gamma < 0.0 || gamma > 1.0)
    throw ParameterError("multistep queue: gamma must lie in [0, 1]");
}

std::optional<Transition> MultistepQueue::push(const Transition& t) {
  window_.push_back(t);
  if (static_cast<int>(window_.size()) == n_steps_ || t.done || t.truncated) {
    Transition block = aggregate();
    window_.clear();
    return block;
  }
  return std::nullopt;
}

std::optional<Transition> MultistepQueue::flush() {
  if (window_.empty()) return std::nullopt;
  Transition block = aggregate();
  window_.clear();
  return block;
}

Transition MultistepQueue::aggregate() const {
  Transition block = window_.front();
  block.n_steps = static_cast<int>(window_.size());
  double discount = 1.0;
  double reward = 0.0;
  for (const auto& step : window_) {
    reward += discount * step.reward;
    discount *= gamma_;
  }
  block.reward = reward;
  const Transition& last = window_.back();
  block.next_state = last.next_state;
  block.done = last.done;
  block.truncated = last.truncated;
  return block;
}

}  // namespace relab::buffer
