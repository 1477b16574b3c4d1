#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace relab::run {

/**
 * Bounded multi-producer single-consumer queue. push() blocks while the
 * channel is full, which is the backpressure path: a slow consumer throttles
 * producers instead of dropping data. close() wakes everyone; push on a
 * closed channel returns false and pop on a drained closed channel returns
 * nullopt.
 */
template <typename T>
class Channel {
public:
  explicit Channel(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    return take(lock);
  }

  /// Waits until the deadline; nullopt on timeout or on a drained closed channel.
  std::optional<T> pop_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(mu_);
    not_empty_.wait_until(lock, deadline, [&] { return closed_ || !items_.empty(); });
    return take(lock);
  }

  std::optional<T> try_pop() {
    std::unique_lock lock(mu_);
    return take(lock);
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

private:
  std::optional<T> take(std::unique_lock<std::mutex>& lock) {
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    lock.unlock();
    return item;
  }

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

/**
 * Single-slot latest-value mailbox. publish() replaces any unread value, so a
 * slow reader always sees the newest message rather than a backlog. Sync
 * actors block in take(); async actors poll with try_take().
 */
template <typename T>
class Mailbox {
public:
  void publish(T item) {
    std::lock_guard lock(mu_);
    slot_ = std::move(item);
    ready_.notify_all();
  }

  std::optional<T> take() {
    std::unique_lock lock(mu_);
    ready_.wait(lock, [&] { return closed_ || slot_.has_value(); });
    auto out = std::move(slot_);
    slot_.reset();
    return out;
  }

  std::optional<T> try_take() {
    std::lock_guard lock(mu_);
    auto out = std::move(slot_);
    slot_.reset();
    return out;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    ready_.notify_all();
  }

private:
  std::mutex mu_;
  std::condition_variable ready_;
  std::optional<T> slot_;
  bool closed_ = false;
};

}  // namespace relab::run
