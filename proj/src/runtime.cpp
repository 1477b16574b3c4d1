#include "relab/run/runtime.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "relab/agent/registry.hpp"
#include "relab/error.hpp"
#include "relab/logging/checkpoint.hpp"
#include "relab/logging/run_dir.hpp"
#include "relab/rng.hpp"
#include "run_internal.hpp"

namespace relab::run {

TrainSettings read_train_settings(const config::ConfigTree& cfg) {
  TrainSettings ts;
  ts.training = cfg.get_bool("train", "training", true);
  ts.load_path = cfg.get_string("train", "load_path", "");
  ts.run_step = cfg.get_int("train", "run_step", ts.run_step);
  ts.print_period = cfg.get_int("train", "print_period", ts.print_period);
  ts.save_period = cfg.get_int("train", "save_period", ts.save_period);
  ts.eval_iteration = static_cast<int>(cfg.get_int("train", "eval_iteration", ts.eval_iteration));
  ts.update_period = cfg.get_int("train", "update_period", ts.update_period);
  ts.num_workers = static_cast<int>(cfg.get_int("train", "num_workers", ts.num_workers));
  ts.seed = static_cast<std::uint64_t>(cfg.get_int("train", "seed", 42));
  ts.window_ms = cfg.get_int("train", "async_window_ms", ts.window_ms);

  if (ts.run_step < 1) throw ParameterError("train.run_step must be positive");
  if (ts.print_period < 1) throw ParameterError("train.print_period must be positive");
  if (ts.save_period < 1) throw ParameterError("train.save_period must be positive");
  if (ts.eval_iteration < 1) throw ParameterError("train.eval_iteration must be positive");

  config::warn_unknown_keys(cfg, "train",
                            {"training", "load_path", "run_step", "print_period", "save_period",
                             "eval_iteration", "update_period", "num_workers", "seed",
                             "async_window_ms"});
  return ts;
}

std::unique_ptr<env::Env> env_from_config(const config::ConfigTree& cfg) {
  const std::string name = cfg.get_string("env", "name", "");
  if (name.empty()) throw SchemaError("config: env.name is required");
  // action_type and render are part of the env table schema; the built-in
  // environments have fixed action spaces and run headless, so both are inert
  config::warn_unknown_keys(cfg, "env", {"name", "length", "action_type", "render"});
  const int length = static_cast<int>(cfg.get_int("env", "length", 5));
  return env::build_env(name, length);
}

double evaluate_policy(agent::Agent& agent, env::Env& env, int episodes,
                       std::uint64_t seed_base, logging::TrajectoryWriter* trajectory) {
  if (episodes < 1) throw ParameterError("evaluation needs at least one episode");
  double total = 0.0;
  for (int k = 0; k < episodes; ++k) {
    auto obs = env.reset(Rng::derive(seed_base, stream::kEval, static_cast<std::uint64_t>(k)));
    double episode_return = 0.0;
    for (long step = 0;; ++step) {
      const auto info = agent.act(obs, 0, false);
      const auto result = env.step(info.action);
      if (k == 0 && trajectory) trajectory->record(step, obs, info.action, result.reward);
      episode_return += result.reward;
      obs = result.observation;
      if (result.done || result.truncated) break;
    }
    total += episode_return;
  }
  return total / episodes;
}

Manager::Manager(const config::ConfigTree& cfg, const logging::RunDir& run,
                 logging::MetricsWriter& metrics, const logging::Clock& clock,
                 const TrainSettings& ts, double stop_score, RunSummary& summary)
    : env_(env_from_config(cfg)),
      agent_(agent::build_agent(cfg, env_->spec())),
      run_(run),
      metrics_(metrics),
      clock_(clock),
      seed_(ts.seed),
      eval_iteration_(ts.eval_iteration),
      stop_score_(stop_score),
      summary_(summary) {}

bool Manager::evaluate(long global_step, const std::vector<nn::Matrix>& params) {
  try {
    agent_->import_params(params);
    logging::TrajectoryWriter trajectory(run_.trajectory_file(global_step));
    const auto seed_base =
        Rng::derive(seed_, stream::kEval, static_cast<std::uint64_t>(global_step));
    const double score =
        evaluate_policy(*agent_, *env_, eval_iteration_, seed_base, &trajectory);
    metrics_.append(global_step, "score", score, clock_.now_ms() / 1000.0);
    {
      std::lock_guard lock(summary_mu_);
      summary_.evaluations.push_back({global_step, score});
      summary_.final_score = score;
      if (std::isnan(summary_.best_score) || score > summary_.best_score)
        summary_.best_score = score;
    }
    return !std::isnan(stop_score_) && score >= stop_score_;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[manage] evaluation at step %ld failed: %s\n", global_step, e.what());
    return false;
  }
}

namespace {

/// Milliseconds elapsed on the steady clock since t0.
std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

void save_agent_checkpoint(const logging::RunDir& run, agent::Agent& agent, long step,
                           const logging::Clock& clock) {
  logging::StateMap state;
  agent.export_state(state);
  logging::save_checkpoint(run.checkpoint_file(step), agent.name(), step, state, clock);
}

}  // namespace

RunSummary run_single(const config::ConfigTree& cfg, const RunOptions& opts) {
  const TrainSettings ts = read_train_settings(cfg);
  if (!ts.training) return run_eval(cfg, opts);

  logging::SystemClock system_clock;
  const logging::Clock& clock = opts.clock ? *opts.clock : system_clock;

  auto env = env_from_config(cfg);
  auto agent = agent::build_agent(cfg, env->spec());
  agent->seed_streams(ts.seed, 0);
  if (!ts.load_path.empty())
    agent->import_state(logging::load_checkpoint(ts.load_path, agent->name()));

  const auto run =
      logging::make_run_dir(opts.logs_root, env->spec().name, agent->name(), cfg, clock);
  logging::MetricsWriter metrics(run.metrics_file());

  RunSummary summary;
  summary.run_dir = run.path;
  Manager manager(cfg, run, metrics, clock, ts, opts.stop_on_eval_score, summary);

  const auto t0 = std::chrono::steady_clock::now();
  auto state = env->reset(Rng::derive(ts.seed, stream::kEnv, 0));
  LossMeter loss;
  long last_saved = -1;
  bool stop = false;

  long step = 0;
  while (step < ts.run_step && !stop) {
    const auto info = agent->act(state, step, true);
    const auto result = env->step(info.action);

    buffer::Transition t;
    t.state = state;
    t.action = info.action;
    t.reward = result.reward;
    t.next_state = result.observation;
    t.done = result.done;
    t.truncated = result.truncated;
    t.logprob = info.logprob;
    t.value = info.value;
    t.actor_id = 0;
    if (opts.transition_tap) opts.transition_tap(t);

    const auto stats = agent->process(t, step + 1);
    if (stats.learned) {
      ++summary.learner_updates;
      loss.add(stats.loss);
    }
    state = (result.done || result.truncated) ? env->reset() : result.observation;
    ++step;

    if (step % ts.print_period == 0) {
      if (loss.count() > 0) metrics.append(step, "loss", loss.take_mean(), clock.now_ms() / 1000.0);
      if (manager.evaluate(step, agent->export_params())) {
        summary.stopped_early = true;
        stop = true;
      }
      if (opts.wall_clock_limit_ms >= 0 && elapsed_ms(t0) >= opts.wall_clock_limit_ms) {
        summary.stopped_early = true;
        stop = true;
      }
    }
    if (step % ts.save_period == 0) {
      save_agent_checkpoint(run, *agent, step, clock);
      last_saved = step;
    }
  }

  if (last_saved != step) save_agent_checkpoint(run, *agent, step, clock);
  summary.global_steps = step;
  summary.transitions_consumed = step;
  return summary;
}

RunSummary run_eval(const config::ConfigTree& cfg, const RunOptions& opts) {
  const TrainSettings ts = read_train_settings(cfg);

  logging::SystemClock system_clock;
  const logging::Clock& clock = opts.clock ? *opts.clock : system_clock;

  auto env = env_from_config(cfg);
  auto agent = agent::build_agent(cfg, env->spec());
  agent->seed_streams(ts.seed, 0);

  long at_step = 0;
  if (!ts.load_path.empty()) {
    logging::CheckpointInfo info;
    agent->import_state(logging::load_checkpoint(ts.load_path, agent->name(), &info));
    at_step = info.step;
  } else {
    std::fprintf(stderr,
                 "[run] no train.load_path set; evaluating freshly initialized parameters\n");
  }

  const auto run =
      logging::make_run_dir(opts.logs_root, env->spec().name, agent->name(), cfg, clock);
  logging::MetricsWriter metrics(run.metrics_file());

  RunSummary summary;
  summary.run_dir = run.path;
  logging::TrajectoryWriter trajectory(run.trajectory_file(at_step));
  const auto seed_base = Rng::derive(ts.seed, stream::kEval, static_cast<std::uint64_t>(at_step));
  const double score =
      evaluate_policy(*agent, *env, ts.eval_iteration, seed_base, &trajectory);
  metrics.append(at_step, "score", score, clock.now_ms() / 1000.0);
  summary.evaluations.push_back({at_step, score});
  summary.best_score = summary.final_score = score;
  return summary;
}

RunSummary execute(RunMode mode, const config::ConfigTree& cfg, const RunOptions& opts) {
  switch (mode) {
    case RunMode::single: return run_single(cfg, opts);
    case RunMode::sync: return run_sync(cfg, opts);
    case RunMode::async: return run_async(cfg, opts);
    case RunMode::eval: return run_eval(cfg, opts);
  }
  throw ParameterError("unknown run mode");
}

}  // namespace relab::run
