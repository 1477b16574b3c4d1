#pragma once

#include <memory>
#include <optional>

#include "relab/agent/agent.hpp"
#include "relab/buffer/buffers.hpp"
#include "relab/env/env.hpp"
#include "relab/net/registry.hpp"
#include "relab/nn/optim.hpp"

namespace relab::agent {

struct DdpgOptions {
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;
  double tau = 0.005;        ///< soft-update rate for both target networks
  double noise_sigma = 0.1;  ///< exploration noise std as a fraction of the action range
  int buffer_size = 50000;
  int batch_size = 128;
  long start_train_step = 2000;
  std::string optim_name = "adam";
  double lr = 1e-3;        ///< critic learning rate
  double actor_lr = 1e-4;
};

/**
 * Deterministic actor-critic for continuous actions. The critic regresses
 * r + gamma * (1-done) * Q_target(s', actor_target(s')); the actor ascends
 * Q(s, actor(s)). Targets track the online networks with soft updates.
 */
class DdpgAgent : public Agent {
public:
  DdpgAgent(std::string name, const env::EnvSpec& env_spec, DdpgOptions opts);

  ActInfo act(const std::vector<double>& state, long step, bool training) override;
  void store(const buffer::Transition& t) override;
  LearnStats learn(long step) override;

  std::vector<nn::Parameter*> parameters() override { return actor_->parameters(); }
  void export_state(logging::StateMap& out) override;
  void import_state(const logging::StateMap& in) override;

  /// One critic + actor step on an explicit batch; exposed for direct testing.
  LearnStats learn_on_batch(const std::vector<buffer::Transition>& batch);

  /// Critic value for explicit state/action rows; exposed for direct testing.
  double critic_value(const std::vector<double>& state, const std::vector<double>& action);

  const DdpgOptions& options() const { return opts_; }

private:
  nn::Matrix concat_state_action(const nn::Matrix& states, const nn::Matrix& actions) const;
  void soft_update(net::Head& target, net::Head& online) const;

  DdpgOptions opts_;
  int obs_dim_;
  int act_dim_;
  std::vector<double> low_, high_, noise_std_;
  std::unique_ptr<net::Head> actor_;
  std::unique_ptr<net::Head> critic_;
  std::unique_ptr<net::Head> actor_target_;
  std::unique_ptr<net::Head> critic_target_;
  std::unique_ptr<nn::Optimizer> actor_optimizer_;
  std::unique_ptr<nn::Optimizer> critic_optimizer_;
  buffer::ReplayBuffer replay_;
};

}  // namespace relab::agent
