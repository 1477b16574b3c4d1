#pragma once

#include <deque>
#include <memory>

#include "relab/agent/agent.hpp"
#include "relab/agent/targets.hpp"
#include "relab/env/env.hpp"
#include "relab/net/registry.hpp"
#include "relab/nn/optim.hpp"

namespace relab::agent {

/// Softmax over one logits row with the usual max-subtraction guard.
std::vector<double> softmax_row(const nn::Matrix& logits, int row, int n);

struct ReinforceOptions {
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;
  std::string optim_name = "adam";
  double lr = 1e-3;
};

/**
 * Vanilla policy gradient: collects whole episodes and, once an episode ends,
 * takes one gradient step on loss = -sum_t log pi(a_t|s_t) * G_t with the
 * discounted returns whitened over the episode.
 */
class ReinforceAgent : public Agent {
public:
  ReinforceAgent(std::string name, const env::EnvSpec& env_spec, ReinforceOptions opts);

  ActInfo act(const std::vector<double>& state, long step, bool training) override;
  void store(const buffer::Transition& t) override;
  LearnStats learn(long step) override;

  std::vector<nn::Parameter*> parameters() override { return policy_->parameters(); }
  void export_state(logging::StateMap& out) override;
  void import_state(const logging::StateMap& in) override;

  /// One gradient step on a completed episode; exposed for direct testing.
  LearnStats learn_on_episode(const std::vector<buffer::Transition>& episode);

private:
  ReinforceOptions opts_;
  int obs_dim_;
  int n_actions_;
  std::unique_ptr<net::Head> policy_;
  std::unique_ptr<nn::Optimizer> optimizer_;
  std::map<int, std::vector<buffer::Transition>> open_episodes_;  ///< per actor id
  std::deque<std::vector<buffer::Transition>> ready_;
};

struct PpoOptions {
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 3;
  int n_step = 128;     ///< rollout horizon before an update
  int batch_size = 32;  ///< minibatch size within an update
  double vf_coef = 0.5;
  double ent_coef = 0.01;
  double grad_clip = 0.5;
  std::string optim_name = "adam";
  double lr = 3e-4;
};

/**
 * Clipped-surrogate policy optimization on a shared policy/value head.
 * Transitions accumulate in a rollout; once it reaches the horizon the agent
 * computes advantages per actor segment (bootstrapping truncated segments
 * with the current value function), whitens them across the batch, and runs
 * several epochs of shuffled minibatch updates.
 */
class PpoAgent : public Agent {
public:
  PpoAgent(std::string name, const env::EnvSpec& env_spec, PpoOptions opts);

  ActInfo act(const std::vector<double>& state, long step, bool training) override;
  void store(const buffer::Transition& t) override;
  LearnStats learn(long step) override;

  std::vector<nn::Parameter*> parameters() override { return net_->parameters(); }
  void export_state(logging::StateMap& out) override;
  void import_state(const logging::StateMap& in) override;

  /// Runs the full update (advantage estimation + epochs) on an explicit
  /// rollout; exposed for direct testing.
  LearnStats learn_on_rollout(const std::vector<buffer::Transition>& rollout);

  const PpoOptions& options() const { return opts_; }

private:
  double state_value(const std::vector<double>& state);

  PpoOptions opts_;
  int obs_dim_;
  int n_actions_;
  std::unique_ptr<net::Head> net_;  ///< policy/value head, columns [logits | v]
  std::unique_ptr<nn::Optimizer> optimizer_;
  std::vector<buffer::Transition> rollout_;
};

/**
 * Clipped PPO surrogate on one minibatch, with analytic logits/value
 * gradients. `out` is the packed [logits | value] network output;
 * `grad` matches its shape. Free function so gradients can be checked
 * against finite differences directly.
 */
struct PpoLossResult {
  double value = 0.0;
  nn::Matrix grad;
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

PpoLossResult ppo_surrogate(const nn::Matrix& out, const std::vector<int>& actions,
                            const std::vector<double>& old_logprobs,
                            const std::vector<double>& advantages,
                            const std::vector<double>& returns, double clip_ratio,
                            double vf_coef, double ent_coef);

}  // namespace relab::agent
