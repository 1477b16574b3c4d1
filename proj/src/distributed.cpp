#include <atomic>
#include <chrono>
#include <map>
#include <set>
#include <thread>

#include "relab/agent/registry.hpp"
#include "relab/error.hpp"
#include "relab/logging/checkpoint.hpp"
#include "relab/logging/run_dir.hpp"
#include "relab/rng.hpp"
#include "relab/run/channel.hpp"
#include "relab/run/runtime.hpp"
#include "run_internal.hpp"

namespace relab::run {
namespace {

using std::chrono::milliseconds;
using std::chrono::steady_clock;

/**
 * Actor worker: steps its own env with an act-only agent copy, ships blocks
 * of update_period transitions, and imports parameter updates. In sync mode
 * it blocks on the mailbox after every block (the round barrier); in async
 * mode it polls and keeps going on stale parameters. A crash is reported as
 * an error message so the learner can abort with a named diagnostic.
 */
void actor_main(int id, const config::ConfigTree& cfg, const TrainSettings& ts,
                const RunOptions& opts, bool barrier, Channel<TransitionBatchMsg>& batches,
                Mailbox<ParamUpdateMsg>& params) {
  try {
    auto env = env_from_config(cfg);
    auto agent = agent::build_agent(cfg, env->spec());
    agent->seed_streams(ts.seed, id);
    auto state = env->reset(Rng::derive(ts.seed, stream::kEnv, static_cast<std::uint64_t>(id)));

    long version = 0;
    long base_step = 0;   // learner global step at the last parameter import
    long since_base = 0;  // transitions produced since then
    long total = 0;       // actor-lifetime transitions

    while (true) {
      TransitionBatchMsg msg;
      msg.actor_id = id;
      msg.transitions.reserve(static_cast<std::size_t>(ts.update_period));
      for (long i = 0; i < ts.update_period; ++i) {
        if (opts.actor_hook) opts.actor_hook(id, total);
        const auto info = agent->act(state, base_step + since_base, true);
        const auto result = env->step(info.action);

        buffer::Transition t;
        t.state = std::move(state);
        t.action = info.action;
        t.reward = result.reward;
        t.next_state = result.observation;
        t.done = result.done;
        t.truncated = result.truncated;
        t.logprob = info.logprob;
        t.value = info.value;
        t.actor_id = id;
        msg.transitions.push_back(std::move(t));

        state = (result.done || result.truncated) ? env->reset() : result.observation;
        ++since_base;
        ++total;
      }
      msg.actor_step = total;
      msg.param_version = version;
      if (!batches.push(std::move(msg))) return;  // learner shut down

      if (barrier) {
        auto update = params.take();
        if (!update) return;  // run over
        agent->import_params(update->params);
        version = update->version;
        base_step = update->global_step;
        since_base = 0;
      } else if (auto update = params.try_take()) {
        agent->import_params(update->params);
        version = update->version;
        base_step = update->global_step;
        since_base = 0;
      }
    }
  } catch (const std::exception& e) {
    TransitionBatchMsg msg;
    msg.actor_id = id;
    msg.error = e.what();
    batches.push(std::move(msg));
  }
}

/// Shared learner scaffolding for both distributed modes.
struct Learner {
  const config::ConfigTree& cfg;
  const TrainSettings& ts;
  const RunOptions& opts;
  const logging::Clock& clock;

  std::unique_ptr<agent::Agent> agent;
  logging::RunDir run;
  std::unique_ptr<logging::MetricsWriter> metrics;
  RunSummary summary;
  std::unique_ptr<Manager> manager;

  Channel<TransitionBatchMsg> batches;
  std::vector<std::unique_ptr<Mailbox<ParamUpdateMsg>>> mailboxes;
  std::vector<std::thread> actors;
  std::thread manager_thread;
  SnapshotSlot snapshot;
  std::atomic<bool> stop{false};

  steady_clock::time_point t0 = steady_clock::now();
  long global = 0;
  long version = 0;
  long eval_bucket = 0;
  long save_bucket = 0;
  long last_saved = -1;
  std::map<int, long> last_actor_step;
  LossMeter loss;

  Learner(const config::ConfigTree& cfg_, const TrainSettings& ts_, const RunOptions& opts_,
          const logging::Clock& clock_)
      : cfg(cfg_),
        ts(ts_),
        opts(opts_),
        clock(clock_),
        batches(static_cast<std::size_t>(2 * ts_.num_workers + 2)) {
    auto probe = env_from_config(cfg);
    agent = agent::build_agent(cfg, probe->spec());
    agent->seed_streams(ts.seed, 0);
    if (!ts.load_path.empty())
      agent->import_state(logging::load_checkpoint(ts.load_path, agent->name()));

    run = logging::make_run_dir(opts.logs_root, probe->spec().name, agent->name(), cfg, clock);
    metrics = std::make_unique<logging::MetricsWriter>(run.metrics_file());
    summary.run_dir = run.path;
    manager = std::make_unique<Manager>(cfg, run, *metrics, clock, ts, opts.stop_on_eval_score,
                                        summary);
    snapshot.publish(0, 0, agent->export_params());
  }

  bool wall_exceeded() const {
    if (opts.wall_clock_limit_ms < 0) return false;
    const auto elapsed =
        std::chrono::duration_cast<milliseconds>(steady_clock::now() - t0).count();
    return elapsed >= opts.wall_clock_limit_ms;
  }

  void start_actors(bool barrier) {
    for (int a = 0; a < ts.num_workers; ++a)
      mailboxes.push_back(std::make_unique<Mailbox<ParamUpdateMsg>>());
    for (int a = 0; a < ts.num_workers; ++a)
      actors.emplace_back(actor_main, a, std::cref(cfg), std::cref(ts), std::cref(opts), barrier,
                          std::ref(batches), std::ref(*mailboxes[a]));
  }

  /// Async manage loop: polls the snapshot slot and evaluates on every
  /// print_period crossing, independently of the learner.
  void start_manager_thread() {
    manager_thread = std::thread([this] {
      long bucket = 0;
      while (!stop.load()) {
        std::this_thread::sleep_for(milliseconds(2));
        const auto snap = snapshot.read();
        if (snap.global_step / ts.print_period > bucket) {
          bucket = snap.global_step / ts.print_period;
          if (manager->evaluate(snap.global_step, snap.params)) stop.store(true);
        }
      }
    });
  }

  void shutdown() {
    stop.store(true);
    batches.close();
    for (auto& m : mailboxes) m->close();
    for (auto& t : actors) t.join();
    actors.clear();
    if (manager_thread.joinable()) manager_thread.join();
  }

  /// Rejects error messages and repeated blocks; returns the validated message.
  TransitionBatchMsg validate(TransitionBatchMsg msg, const char* mode) {
    if (!msg.error.empty())
      throw StateError(std::string(mode) + " round " + std::to_string(summary.rounds) +
                       " aborted: actor " + std::to_string(msg.actor_id) +
                       " failed: " + msg.error);
    auto [it, fresh] = last_actor_step.try_emplace(msg.actor_id, msg.actor_step);
    if (!fresh) {
      if (msg.actor_step <= it->second)
        throw StateError(std::string(mode) + ": actor " + std::to_string(msg.actor_id) +
                         " re-delivered block " + std::to_string(msg.actor_step));
      it->second = msg.actor_step;
    }
    return msg;
  }

  void consume(const TransitionBatchMsg& msg) {
    if (opts.batch_tap) opts.batch_tap(msg);
    for (const auto& t : msg.transitions) {
      if (opts.transition_tap) opts.transition_tap(t);
      agent->store(t);
    }
    global += static_cast<long>(msg.transitions.size());
    summary.transitions_consumed += static_cast<long>(msg.transitions.size());
  }

  void learn_and_version() {
    const auto stats = agent->learn(global);
    if (stats.learned) {
      ++summary.learner_updates;
      loss.add(stats.loss);
    }
    ++summary.rounds;
    ++version;
    snapshot.publish(version, global, agent->export_params());
  }

  /// Inline print/save crossings (sync mode evaluates here; async mode only
  /// writes loss and checkpoints, with evaluation on the manager thread).
  void handle_crossings(bool evaluate_inline) {
    if (global / ts.print_period > eval_bucket) {
      eval_bucket = global / ts.print_period;
      if (loss.count() > 0)
        metrics->append(global, "loss", loss.take_mean(), clock.now_ms() / 1000.0);
      if (evaluate_inline && manager->evaluate(global, snapshot.read().params))
        stop.store(true);
    }
    if (global / ts.save_period > save_bucket) {
      save_bucket = global / ts.save_period;
      logging::StateMap st;
      agent->export_state(st);
      logging::save_checkpoint(run.checkpoint_file(global), agent->name(), global, st, clock);
      last_saved = global;
    }
    if (wall_exceeded()) stop.store(true);
  }

  RunSummary finish() {
    shutdown();
    if (stop.load() && global < ts.run_step) summary.stopped_early = true;
    if (last_saved != global) {
      logging::StateMap st;
      agent->export_state(st);
      logging::save_checkpoint(run.checkpoint_file(global), agent->name(), global, st, clock);
    }
    summary.global_steps = global;
    return std::move(summary);
  }
};

}  // namespace

RunSummary run_sync(const config::ConfigTree& cfg, const RunOptions& opts) {
  const TrainSettings ts = read_train_settings(cfg);
  if (!ts.training) return run_eval(cfg, opts);
  if (ts.num_workers < 1) throw ParameterError("train.num_workers must be at least 1");
  if (ts.update_period < 1) throw ParameterError("train.update_period must be at least 1");

  logging::SystemClock system_clock;
  const logging::Clock& clock = opts.clock ? *opts.clock : system_clock;
  Learner learner(cfg, ts, opts, clock);
  learner.start_actors(/*barrier=*/true);

  try {
    while (learner.global < ts.run_step && !learner.stop.load()) {
      // the round barrier: exactly one block from every actor
      std::map<int, TransitionBatchMsg> round;
      while (static_cast<int>(round.size()) < ts.num_workers) {
        auto msg = learner.batches.pop();
        if (!msg) throw StateError("sync: actor channel closed mid-round");
        auto checked = learner.validate(std::move(*msg), "sync");
        if (round.count(checked.actor_id))
          throw StateError("sync: actor " + std::to_string(checked.actor_id) +
                           " sent two blocks in one round");
        round.emplace(checked.actor_id, std::move(checked));
      }

      const long round_version = round.begin()->second.param_version;
      for (const auto& [id, msg] : round) {
        if (static_cast<long>(msg.transitions.size()) != ts.update_period)
          throw StateError("sync: actor " + std::to_string(id) + " delivered " +
                           std::to_string(msg.transitions.size()) + " transitions, expected " +
                           std::to_string(ts.update_period));
        if (msg.param_version != round_version)
          throw StateError("sync: actor " + std::to_string(id) +
                           " joined the round at parameter version " +
                           std::to_string(msg.param_version) + ", expected " +
                           std::to_string(round_version));
      }

      for (const auto& [id, msg] : round) learner.consume(msg);
      learner.learn_and_version();

      // broadcast before the next round starts
      const auto snap = learner.snapshot.read();
      for (auto& mailbox : learner.mailboxes)
        mailbox->publish({snap.version, snap.global_step, snap.params});

      learner.handle_crossings(/*evaluate_inline=*/true);
    }
  } catch (...) {
    learner.shutdown();
    throw;
  }
  return learner.finish();
}

RunSummary run_async(const config::ConfigTree& cfg, const RunOptions& opts) {
  const TrainSettings ts = read_train_settings(cfg);
  if (!ts.training) return run_eval(cfg, opts);
  if (ts.num_workers < 1) throw ParameterError("train.num_workers must be at least 1");
  if (ts.update_period < 1) throw ParameterError("train.update_period must be at least 1");
  if (ts.window_ms <= 0) throw ParameterError("train.async_window_ms must be positive");

  logging::SystemClock system_clock;
  const logging::Clock& clock = opts.clock ? *opts.clock : system_clock;
  Learner learner(cfg, ts, opts, clock);
  learner.start_manager_thread();
  learner.start_actors(/*barrier=*/false);

  try {
    while (learner.global < ts.run_step && !learner.stop.load()) {
      // wait for the first completed actor, staying responsive to stop/limits
      std::vector<TransitionBatchMsg> window;
      while (window.empty()) {
        if (auto msg = learner.batches.pop_until(steady_clock::now() + milliseconds(50))) {
          window.push_back(learner.validate(std::move(*msg), "async"));
          break;
        }
        if (learner.stop.load() || learner.wall_exceeded()) break;
      }
      if (window.empty()) {
        learner.stop.store(true);
        break;
      }

      // whoever else completes within the collection window joins this batch
      const auto deadline = steady_clock::now() + milliseconds(ts.window_ms);
      while (auto msg = learner.batches.pop_until(deadline))
        window.push_back(learner.validate(std::move(*msg), "async"));

      std::set<int> consumed;
      for (const auto& msg : window) {
        learner.consume(msg);
        consumed.insert(msg.actor_id);
      }
      learner.learn_and_version();

      // updated parameters go only to the actors consumed this window
      const auto snap = learner.snapshot.read();
      for (const int id : consumed)
        learner.mailboxes[static_cast<std::size_t>(id)]->publish(
            {snap.version, snap.global_step, snap.params});

      learner.handle_crossings(/*evaluate_inline=*/false);
    }
  } catch (...) {
    learner.shutdown();
    throw;
  }
  return learner.finish();
}

}  // namespace relab::run
