#pragma once

#include <cstdint>
#include <vector>

#include "relab/net/spec.hpp"
#include "relab/nn/matrix.hpp"

namespace relab::agent {

/**
 * One-step (or multistep) TD targets from a target network:
 *   y_i = r_i + gamma^{n_i} * (1 - done_i) * max_a q_next_target(i, a)
 * Rewards of multistep transitions are already discounted sums, so gamma is
 * raised to the transition's span.
 */
std::vector<double> dqn_target(const std::vector<double>& rewards,
                               const std::vector<std::uint8_t>& dones,
                               const std::vector<int>& n_steps, double gamma,
                               const nn::Matrix& q_next_target);

/// Double-DQN targets: the online network picks the argmax action, the target
/// network evaluates it. Ties resolve to the lowest action index.
std::vector<double> double_dqn_target(const std::vector<double>& rewards,
                                      const std::vector<std::uint8_t>& dones,
                                      const std::vector<int>& n_steps, double gamma,
                                      const nn::Matrix& q_next_online,
                                      const nn::Matrix& q_next_target);

/// Lowest-index argmax over one matrix row.
int argmax_row(const nn::Matrix& m, int row);

/**
 * Projects the shifted-and-scaled distribution r + gamma_n * (1-done) * z onto
 * the fixed support. `src` and `dst` hold n_atoms entries; dst is overwritten.
 * Total probability mass is preserved.
 */
void c51_project(double reward, bool done, double gamma_n,
                 const net::CategoricalSupport& support, const double* src, double* dst);

/// Cross-entropy between projected target distributions and the online
/// network's per-action categorical output.
struct CategoricalLossResult {
  double value = 0.0;
  nn::Matrix grad;                 ///< d loss / d logits, [batch x actions*atoms]
  std::vector<double> per_sample;  ///< unweighted per-row CE (priority signal)
};

/**
 * loss = mean_i w_i * CE(projected_i, softmax(logits_i at action a_i));
 * gradients land only on the taken action's atom block.
 */
CategoricalLossResult categorical_ce_loss(const nn::Matrix& logits,
                                          const nn::Matrix& projected,
                                          const std::vector<int>& actions, int n_actions,
                                          int n_atoms,
                                          const std::vector<double>* weights = nullptr);

/// Quantile-regression huber loss between predicted and target quantiles.
struct QuantileLossResult {
  double value = 0.0;
  nn::Matrix grad;                  ///< d loss / d pred, [batch x n]
  std::vector<double> per_sample;   ///< unweighted per-row loss (priority signal)
};

/**
 * loss = mean_i w_i * (1/(n*n)) sum_{p,t} |tau_p - 1{u<0}| * huber_k(u)/k,
 * with u = target(i,t) - pred(i,p).
 */
QuantileLossResult quantile_huber_loss(const nn::Matrix& pred, const nn::Matrix& target,
                                       const std::vector<double>& taus, double kappa,
                                       const std::vector<double>* weights = nullptr);

/// Generalized advantage estimation over one trajectory segment.
/// `values` carries T+1 entries, the last one the bootstrap value.
struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  ///< advantage + value, the value-function target
};

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<std::uint8_t>& dones, double gamma, double lambda);

/// Discounted returns-to-go of one episode; the recurrence behind reinforce.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

/// In-place whitening to zero mean and unit variance (eps-guarded).
void whiten(std::vector<double>& xs, double eps = 1e-8);

}  // namespace relab::agent
