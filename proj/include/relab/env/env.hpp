#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relab/buffer/transition.hpp"
#include "relab/rng.hpp"

namespace relab::env {

enum class ActionType { discrete, continuous };

struct EnvSpec {
  std::string name;
  int obs_dim = 0;
  ActionType action_type = ActionType::discrete;
  int n_actions = 0;                ///< discrete envs
  std::vector<double> action_low;   ///< continuous envs
  std::vector<double> action_high;
  int max_episode_steps = 0;        ///< step limit before truncation
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;       ///< true termination (failure/goal), never the step limit
  bool truncated = false;  ///< step limit reached
};

/**
 * Episodic environment. The base class owns episode bookkeeping: it rejects
 * step() before reset() or after an episode ended, counts steps, and flips
 * `truncated` when the step limit is hit. Randomness comes from an internal
 * Rng so that a fixed seed reproduces the same episode under the same actions.
 */
class Env {
public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  /// Starts a new episode; an explicit seed reseeds the internal generator first.
  std::vector<double> reset(std::optional<std::uint64_t> seed = std::nullopt);

  StepResult step(const buffer::Action& action);

  /// Reseeds without resetting (runtime wires per-actor streams this way).
  void seed(std::uint64_t s) { rng_ = Rng(s); }

  long episode_step() const { return episode_step_; }

protected:
  virtual std::vector<double> do_reset() = 0;
  virtual StepResult do_step(const buffer::Action& action) = 0;

  /// Validates and normalizes an action; clips continuous values into bounds
  /// (warning once per instance), bounds-checks discrete indices.
  buffer::Action check_action(const buffer::Action& action);

  EnvSpec spec_;
  Rng rng_{0};

private:
  bool needs_reset_ = true;
  bool warned_clip_ = false;
  long episode_step_ = 0;
};

/// One-dimensional cart with a balancing pole; fail when the cart leaves
/// +-2.4 or the pole tilts past ~12 degrees, +1 reward per step, 500-step cap.
class CartPoleEnv : public Env {
public:
  CartPoleEnv();

  /// Test hooks for dynamics checks: raw state is [x, x_dot, theta, theta_dot].
  void set_state(const std::vector<double>& state);
  const std::vector<double>& state() const { return state_; }

protected:
  std::vector<double> do_reset() override;
  StepResult do_step(const buffer::Action& action) override;

private:
  std::vector<double> state_{0.0, 0.0, 0.0, 0.0};
};

/// Torque-controlled pendulum swing-up; observation (cos th, sin th, th_dot),
/// reward is the negative of the squared-angle cost, 200-step cap, never done.
class PendulumEnv : public Env {
public:
  PendulumEnv();

  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

protected:
  std::vector<double> do_reset() override;
  StepResult do_step(const buffer::Action& action) override;

private:
  std::vector<double> observe() const;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

/// Deterministic corridor of `length` cells with a one-hot observation; start
/// at cell 0, +1 reward on reaching the goal cell at the far end.
class GridWorldEnv : public Env {
public:
  explicit GridWorldEnv(int length = 5);

  int position() const { return position_; }

protected:
  std::vector<double> do_reset() override;
  StepResult do_step(const buffer::Action& action) override;

private:
  std::vector<double> observe() const;
  int length_;
  int position_ = 0;
};

/// Registered environment names, sorted.
std::vector<std::string> env_names();

/**
 * Builds an environment by name. `length` feeds GridWorld (ignored elsewhere,
 * <= 1 invalid); unknown names raise LookupError listing the built-ins.
 */
std::unique_ptr<Env> build_env(const std::string& name, int length = 5);

}  // namespace relab::env
