#pragma once

#include <cstdint>
#include <mutex>
#include <string>

#include "relab/config/config.hpp"
#include "relab/logging/metrics.hpp"
#include "relab/logging/run_dir.hpp"
#include "relab/run/runtime.hpp"

namespace relab::run {

/// The train table, read once and validated.
struct TrainSettings {
  bool training = true;
  std::string load_path;
  long run_step = 100000;
  long print_period = 1000;
  long save_period = 10000;
  int eval_iteration = 10;
  long update_period = 32;
  int num_workers = 8;
  std::uint64_t seed = 42;
  std::int64_t window_ms = 100;
};

TrainSettings read_train_settings(const config::ConfigTree& cfg);

/// Mean of losses since the last take_mean().
class LossMeter {
public:
  void add(double loss) {
    sum_ += loss;
    ++count_;
  }
  long count() const { return count_; }
  double take_mean() {
    const double mean = count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0;
    sum_ = 0.0;
    count_ = 0;
    return mean;
  }

private:
  double sum_ = 0.0;
  long count_ = 0;
};

/**
 * The manage loop's work unit: evaluates a parameter snapshot on its own
 * agent and env instances (training state is never touched), records the
 * mean score tagged with the global step, and keeps the run summary's
 * evaluation list. Evaluation failures are logged, never propagated.
 */
class Manager {
public:
  Manager(const config::ConfigTree& cfg, const logging::RunDir& run,
          logging::MetricsWriter& metrics, const logging::Clock& clock,
          const TrainSettings& ts, double stop_score, RunSummary& summary);

  /// Returns true when the mean score reached the configured stop score.
  bool evaluate(long global_step, const std::vector<nn::Matrix>& params);

private:
  std::unique_ptr<env::Env> env_;
  std::unique_ptr<agent::Agent> agent_;
  const logging::RunDir& run_;
  logging::MetricsWriter& metrics_;
  const logging::Clock& clock_;
  std::uint64_t seed_;
  int eval_iteration_;
  double stop_score_;
  RunSummary& summary_;
  std::mutex summary_mu_;
};

}  // namespace relab::run
