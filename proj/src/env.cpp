#include "relab/env/env.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "relab/error.hpp"

namespace relab::env {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double angle_normalize(double theta) {
  double a = std::fmod(theta + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}
}  // namespace

std::vector<double> Env::reset(std::optional<std::uint64_t> seed) {
  if (seed) rng_ = Rng(*seed);
  needs_reset_ = false;
  episode_step_ = 0;
  return do_reset();
}

StepResult Env::step(const buffer::Action& action) {
  if (needs_reset_)
    throw StateError("env '" + spec_.name + "': step before reset or after episode end");
  StepResult result = do_step(check_action(action));
  ++episode_step_;
  if (!result.done && spec_.max_episode_steps > 0 &&
      episode_step_ >= spec_.max_episode_steps)
    result.truncated = true;
  if (result.done || result.truncated) needs_reset_ = true;
  return result;
}

buffer::Action Env::check_action(const buffer::Action& action) {
  if (spec_.action_type == ActionType::discrete) {
    if (action.kind != buffer::Action::Kind::discrete)
      throw TypeError("env '" + spec_.name + "': expected a discrete action");
    if (action.index < 0 || action.index >= spec_.n_actions)
      throw BoundsError("env '" + spec_.name + "': action " + std::to_string(action.index) +
                        " outside [0, " + std::to_string(spec_.n_actions) + ")");
    return action;
  }
  if (action.kind != buffer::Action::Kind::continuous)
    throw TypeError("env '" + spec_.name + "': expected a continuous action");
  if (action.values.size() != spec_.action_low.size())
    throw DimensionError("env '" + spec_.name + "': action has " +
                         std::to_string(action.values.size()) + " dims, expected " +
                         std::to_string(spec_.action_low.size()));
  buffer::Action clipped = action;
  bool any_clip = false;
  for (std::size_t d = 0; d < clipped.values.size(); ++d) {
    if (clipped.values[d] < spec_.action_low[d]) {
      clipped.values[d] = spec_.action_low[d];
      any_clip = true;
    } else if (clipped.values[d] > spec_.action_high[d]) {
      clipped.values[d] = spec_.action_high[d];
      any_clip = true;
    }
  }
  if (any_clip && !warned_clip_) {
    std::fprintf(stderr, "[relab] env '%s': continuous action outside bounds, clipping\n",
                 spec_.name.c_str());
    warned_clip_ = true;
  }
  return clipped;
}

CartPoleEnv::CartPoleEnv() {
  spec_.name = "cartpole";
  spec_.obs_dim = 4;
  spec_.action_type = ActionType::discrete;
  spec_.n_actions = 2;
  spec_.max_episode_steps = 500;
}

void CartPoleEnv::set_state(const std::vector<double>& state) {
  if (state.size() != 4) throw DimensionError("cartpole: state has four components");
  state_ = state;
}

std::vector<double> CartPoleEnv::do_reset() {
  for (auto& v : state_) v = rng_.uniform(-0.05, 0.05);
  return state_;
}

StepResult CartPoleEnv::do_step(const buffer::Action& action) {
  constexpr double kGravity = 9.8;
  constexpr double kMassCart = 1.0;
  constexpr double kMassPole = 0.1;
  constexpr double kTotalMass = kMassCart + kMassPole;
  constexpr double kHalfLength = 0.5;
  constexpr double kPoleMassLength = kMassPole * kHalfLength;
  constexpr double kForceMag = 10.0;
  constexpr double kDt = 0.02;
  constexpr double kThetaThreshold = 0.2095;  // ~12 degrees
  constexpr double kXThreshold = 2.4;

  double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];
  const double force = action.index == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  // semi-implicit Euler: velocities first, then positions with the new velocity
  x_dot += kDt * x_acc;
  x += kDt * x_dot;
  theta_dot += kDt * theta_acc;
  theta += kDt * theta_dot;
  state_ = {x, x_dot, theta, theta_dot};

  StepResult result;
  result.observation = state_;
  result.reward = 1.0;
  result.done = std::abs(x) > kXThreshold || std::abs(theta) > kThetaThreshold;
  return result;
}

PendulumEnv::PendulumEnv() {
  spec_.name = "pendulum";
  spec_.obs_dim = 3;
  spec_.action_type = ActionType::continuous;
  spec_.action_low = {-2.0};
  spec_.action_high = {2.0};
  spec_.max_episode_steps = 200;
}

void PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
}

std::vector<double> PendulumEnv::observe() const {
  return {std::cos(theta_), std::sin(theta_), theta_dot_};
}

std::vector<double> PendulumEnv::do_reset() {
  theta_ = rng_.uniform(-kPi, kPi);
  theta_dot_ = rng_.uniform(-1.0, 1.0);
  return observe();
}

StepResult PendulumEnv::do_step(const buffer::Action& action) {
  constexpr double kMaxSpeed = 8.0;
  constexpr double kDt = 0.05;
  constexpr double kGravity = 10.0;
  constexpr double kMass = 1.0;
  constexpr double kLength = 1.0;

  const double u = action.values[0];
  const double angle = angle_normalize(theta_);
  const double cost = angle * angle + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

  theta_dot_ += (3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                 3.0 / (kMass * kLength * kLength) * u) *
                kDt;
  if (theta_dot_ > kMaxSpeed) theta_dot_ = kMaxSpeed;
  if (theta_dot_ < -kMaxSpeed) theta_dot_ = -kMaxSpeed;
  theta_ += theta_dot_ * kDt;

  StepResult result;
  result.observation = observe();
  result.reward = -cost;
  return result;
}

GridWorldEnv::GridWorldEnv(int length) : length_(length) {
  if (length <= 1) throw ParameterError("gridworld: length must be at least 2");
  spec_.name = "gridworld";
  spec_.obs_dim = length;
  spec_.action_type = ActionType::discrete;
  spec_.n_actions = 2;
  spec_.max_episode_steps = 10 * length;
}

std::vector<double> GridWorldEnv::observe() const {
  std::vector<double> one_hot(length_, 0.0);
  one_hot[position_] = 1.0;
  return one_hot;
}

std::vector<double> GridWorldEnv::do_reset() {
  position_ = 0;
  return observe();
}

StepResult GridWorldEnv::do_step(const buffer::Action& action) {
  const int move = action.index == 1 ? 1 : -1;
  position_ = std::min(std::max(position_ + move, 0), length_ - 1);

  StepResult result;
  result.observation = observe();
  result.done = position_ == length_ - 1;
  result.reward = result.done ? 1.0 : 0.0;
  return result;
}

std::vector<std::string> env_names() { return {"cartpole", "gridworld", "pendulum"}; }

std::unique_ptr<Env> build_env(const std::string& name, int length) {
  if (name == "cartpole") return std::make_unique<CartPoleEnv>();
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "gridworld") return std::make_unique<GridWorldEnv>(length);
  for (const char* external : {"atari", "gym", "mario", "procgen", "mujoco", "mlagents"}) {
    if (name == external)
      throw LookupError("environment '" + name +
                        "' needs an external binding that this build does not ship; "
                        "built-in environments: cartpole gridworld pendulum");
  }
  std::string msg = "unknown environment '" + name + "' (built-ins:";
  for (const auto& n : env_names()) msg += " " + n;
  throw LookupError(msg + ")");
}

}  // namespace relab::env
