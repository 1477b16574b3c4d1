#pragma once

#include <memory>
#include <optional>

#include "relab/agent/agent.hpp"
#include "relab/agent/targets.hpp"
#include "relab/buffer/buffers.hpp"
#include "relab/env/env.hpp"
#include "relab/net/registry.hpp"
#include "relab/nn/optim.hpp"

namespace relab::agent {

/// Linear decay from `init` to `min` over `decay_steps`, then flat.
class EpsilonSchedule {
public:
  EpsilonSchedule(double init, double min, long decay_steps);
  double operator()(long step) const;

private:
  double init_, min_;
  long decay_steps_;
};

/**
 * Composable value-based agent covering the DQN family. The knobs select the
 * pieces: double targets, dueling/noisy networks (by network name), multistep
 * aggregation, prioritized replay, categorical or quantile heads. The preset
 * combinations are registered under their usual names; rainbow is simply all
 * of them at once.
 */
struct DqnOptions {
  std::string network = "discrete_q_network";
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;

  double epsilon_init = 1.0;
  double epsilon_min = 0.01;
  double explore_ratio = 0.2;  ///< fraction of run_step spent decaying epsilon
  long run_step = 100000;

  int buffer_size = 50000;
  int batch_size = 32;
  long start_train_step = 2000;
  long target_update_period = 500;

  bool double_target = false;
  int n_step = 1;

  enum class Dist { scalar, categorical, quantile };
  Dist dist = Dist::scalar;
  int n_atoms = 51;  ///< categorical atoms or quantile count
  double v_min = -10.0;
  double v_max = 10.0;
  double huber_kappa = 1.0;

  std::string buffer = "replay";  ///< "replay" or "per"
  double per_alpha = 0.6;
  double per_beta_init = 0.4;
  double per_epsilon = 1e-6;

  double sigma_init = 0.5;
  std::string optim_name = "adam";
  double lr = 1e-4;
};

class DqnFamilyAgent : public Agent {
public:
  DqnFamilyAgent(std::string name, const env::EnvSpec& env_spec, DqnOptions opts);

  ActInfo act(const std::vector<double>& state, long step, bool training) override;
  void store(const buffer::Transition& t) override;
  LearnStats learn(long step) override;

  std::vector<nn::Parameter*> parameters() override { return online_->parameters(); }
  void export_state(logging::StateMap& out) override;
  void import_state(const logging::StateMap& in) override;

  /// One gradient step on an explicit batch; returns per-sample TD signal.
  /// Exposed so tests can drive learning without buffer sampling.
  LearnStats learn_on_batch(const std::vector<buffer::Transition>& batch,
                            const std::vector<double>* weights,
                            std::vector<double>* per_sample_out = nullptr);

  /// Greedy action values for one state (evaluation-mode forward).
  std::vector<double> q_values(const std::vector<double>& state);

  const DqnOptions& options() const { return opts_; }
  bool uses_noisy_exploration() const { return online_->noisy(); }

private:
  nn::Matrix states_matrix(const std::vector<buffer::Transition>& batch, bool next) const;
  std::vector<double> q_from_output(const nn::Matrix& out, int row) const;
  void sync_target();
  double beta(long step) const;

  DqnOptions opts_;
  int obs_dim_;
  int n_actions_;
  std::unique_ptr<net::Head> online_;
  std::unique_ptr<net::Head> target_;
  std::unique_ptr<nn::Optimizer> optimizer_;
  std::optional<net::CategoricalSupport> support_;
  std::vector<double> taus_;

  std::optional<buffer::ReplayBuffer> replay_;
  std::optional<buffer::PerBuffer> per_;
  std::map<int, buffer::MultistepQueue> multistep_;  ///< per actor id

  long last_target_sync_ = 0;
  EpsilonSchedule epsilon_;
};

}  // namespace relab::agent
