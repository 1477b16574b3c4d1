#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "relab/agent/agent.hpp"
#include "relab/config/config.hpp"
#include "relab/env/env.hpp"
#include "relab/logging/clock.hpp"
#include "relab/logging/metrics.hpp"
#include "relab/run/messages.hpp"

namespace relab::run {

enum class RunMode { single, sync, async, eval };

/**
 * Knobs the launcher and the tests share. The hooks observe a run without
 * changing its semantics: `transition_tap` sees every transition in the order
 * the learner consumes it, `batch_tap` sees every consumed actor message, and
 * `actor_hook` runs before each actor env step (tests use it to slow an actor
 * down or make one crash).
 */
struct RunOptions {
  std::filesystem::path logs_root = "logs";
  const logging::Clock* clock = nullptr;  ///< null -> system clock

  std::function<void(const buffer::Transition&)> transition_tap;
  std::function<void(const TransitionBatchMsg&)> batch_tap;
  std::function<void(int actor_id, long actor_step)> actor_hook;

  /// Stop as soon as a mean evaluation score reaches this (NaN: never).
  double stop_on_eval_score = std::numeric_limits<double>::quiet_NaN();
  /// Stop once the loop has run this long (-1: no limit).
  std::int64_t wall_clock_limit_ms = -1;
};

struct EvalRecord {
  long step = 0;
  double score = 0.0;
};

struct RunSummary {
  std::filesystem::path run_dir;
  long global_steps = 0;
  long learner_updates = 0;       ///< learn() calls that actually trained
  long transitions_consumed = 0;  ///< transitions stored on the learner side
  long rounds = 0;                ///< sync rounds / async collection windows
  std::vector<EvalRecord> evaluations;
  double best_score = std::numeric_limits<double>::quiet_NaN();
  double final_score = std::numeric_limits<double>::quiet_NaN();
  bool stopped_early = false;
};

/// Builds the environment named in cfg's env table; warns once about env
/// keys nothing consumes.
std::unique_ptr<env::Env> env_from_config(const config::ConfigTree& cfg);

/**
 * Mean return of `episodes` full greedy episodes. Episode seeds derive from
 * `seed_base`, so a fixed seed reproduces the same evaluation; the optional
 * writer records the first episode step by step.
 */
double evaluate_policy(agent::Agent& agent, env::Env& env, int episodes,
                       std::uint64_t seed_base, logging::TrajectoryWriter* trajectory = nullptr);

/// One interleaved act/store/learn loop with periodic evaluation and checkpoints.
RunSummary run_single(const config::ConfigTree& cfg, const RunOptions& opts = {});

/**
 * Barrier rounds: every actor contributes exactly update_period transitions
 * per round at one shared param version, the learner consumes the
 * concatenated batch, learns, and broadcasts before the next round.
 */
RunSummary run_sync(const config::ConfigTree& cfg, const RunOptions& opts = {});

/**
 * Time-window collection: the learner consumes whatever completed batches
 * arrive within train.async_window_ms (waiting for at least one), learns, and
 * sends updated parameters only to the actors it consumed from.
 */
RunSummary run_async(const config::ConfigTree& cfg, const RunOptions& opts = {});

/// Pure evaluation of the parameters under train.load_path; writes metrics
/// and a trajectory record but never touches checkpoints.
RunSummary run_eval(const config::ConfigTree& cfg, const RunOptions& opts = {});

/// Dispatches on mode; any mode with train.training=false degrades to run_eval.
RunSummary execute(RunMode mode, const config::ConfigTree& cfg, const RunOptions& opts = {});

}  // namespace relab::run
