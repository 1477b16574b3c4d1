#include "relab/agent/targets.hpp"

#include <cmath>

#include "relab/error.hpp"
#include "relab/net/head.hpp"
#include "relab/nn/losses.hpp"

namespace relab::agent {

namespace {

void check_batch(std::size_t rows, const std::vector<double>& rewards,
                 const std::vector<std::uint8_t>& dones, const std::vector<int>& n_steps) {
  if (rewards.size() != rows || dones.size() != rows || n_steps.size() != rows)
    throw DimensionError("td target: batch vectors and matrix rows differ in length");
}

}  // namespace

int argmax_row(const nn::Matrix& m, int row) {
  int best = 0;
  for (int j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = j;
  return best;
}

std::vector<double> dqn_target(const std::vector<double>& rewards,
                               const std::vector<std::uint8_t>& dones,
                               const std::vector<int>& n_steps, double gamma,
                               const nn::Matrix& q_next_target) {
  check_batch(q_next_target.rows(), rewards, dones, n_steps);
  std::vector<double> out(rewards.size());
  for (int i = 0; i < q_next_target.rows(); ++i) {
    const double best = q_next_target(i, argmax_row(q_next_target, i));
    const double cont = dones[i] ? 0.0 : std::pow(gamma, n_steps[i]);
    out[i] = rewards[i] + cont * best;
  }
  return out;
}

std::vector<double> double_dqn_target(const std::vector<double>& rewards,
                                      const std::vector<std::uint8_t>& dones,
                                      const std::vector<int>& n_steps, double gamma,
                                      const nn::Matrix& q_next_online,
                                      const nn::Matrix& q_next_target) {
  if (!q_next_online.same_shape(q_next_target))
    throw DimensionError("double dqn target: online and target q shapes differ");
  check_batch(q_next_target.rows(), rewards, dones, n_steps);
  std::vector<double> out(rewards.size());
  for (int i = 0; i < q_next_target.rows(); ++i) {
    const int chosen = argmax_row(q_next_online, i);
    const double cont = dones[i] ? 0.0 : std::pow(gamma, n_steps[i]);
    out[i] = rewards[i] + cont * q_next_target(i, chosen);
  }
  return out;
}

void c51_project(double reward, bool done, double gamma_n,
                 const net::CategoricalSupport& support, const double* src, double* dst) {
  const int n = support.n_atoms;
  for (int j = 0; j < n; ++j) dst[j] = 0.0;
  const double cont = done ? 0.0 : gamma_n;
  for (int j = 0; j < n; ++j) {
    double tz = reward + cont * support.atoms[j];
    if (tz < support.v_min) tz = support.v_min;
    if (tz > support.v_max) tz = support.v_max;
    const double b = (tz - support.v_min) / support.delta;
    const int lo = static_cast<int>(std::floor(b));
    const int hi = static_cast<int>(std::ceil(b));
    if (lo == hi) {
      dst[lo] += src[j];
    } else {
      dst[lo] += src[j] * (hi - b);
      dst[hi] += src[j] * (b - lo);
    }
  }
}

CategoricalLossResult categorical_ce_loss(const nn::Matrix& logits,
                                          const nn::Matrix& projected,
                                          const std::vector<int>& actions, int n_actions,
                                          int n_atoms, const std::vector<double>* weights) {
  const int batch = logits.rows();
  if (logits.cols() != n_actions * n_atoms)
    throw DimensionError("categorical ce: logits width must be actions*atoms");
  if (projected.rows() != batch || projected.cols() != n_atoms)
    throw DimensionError("categorical ce: projected target shape mismatch");
  if (static_cast<int>(actions.size()) != batch)
    throw DimensionError("categorical ce: need one action per row");
  if (weights && static_cast<int>(weights->size()) != batch)
    throw DimensionError("categorical ce: need one weight per row");

  const nn::Matrix probs = net::categorical_probs(logits, n_actions, n_atoms);
  CategoricalLossResult out;
  out.grad = nn::Matrix(batch, n_actions * n_atoms);
  out.per_sample.assign(batch, 0.0);
  for (int i = 0; i < batch; ++i) {
    const int base = actions[i] * n_atoms;
    double ce = 0.0;
    for (int k = 0; k < n_atoms; ++k) {
      const double p = std::max(probs(i, base + k), 1e-12);
      ce -= projected(i, k) * std::log(p);
    }
    out.per_sample[i] = ce;
    const double w = weights ? (*weights)[i] : 1.0;
    out.value += w * ce / batch;
    for (int k = 0; k < n_atoms; ++k)
      out.grad(i, base + k) = w * (probs(i, base + k) - projected(i, k)) / batch;
  }
  return out;
}

QuantileLossResult quantile_huber_loss(const nn::Matrix& pred, const nn::Matrix& target,
                                       const std::vector<double>& taus, double kappa,
                                       const std::vector<double>* weights) {
  if (kappa <= 0.0) throw ParameterError("quantile huber: kappa must be positive");
  if (!pred.same_shape(target))
    throw DimensionError("quantile huber: prediction and target shapes differ");
  if (static_cast<int>(taus.size()) != pred.cols())
    throw DimensionError("quantile huber: need one tau per predicted quantile");
  if (weights && static_cast<int>(weights->size()) != pred.rows())
    throw DimensionError("quantile huber: need one weight per row");

  const int batch = pred.rows(), n = pred.cols();
  const double pair_norm = 1.0 / (static_cast<double>(n) * n);
  QuantileLossResult out;
  out.grad = nn::Matrix(batch, n);
  out.per_sample.assign(batch, 0.0);

  for (int i = 0; i < batch; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    for (int p = 0; p < n; ++p) {
      double grad_acc = 0.0;
      for (int t = 0; t < n; ++t) {
        const double u = target(i, t) - pred(i, p);
        const double asym = std::abs(taus[p] - (u < 0.0 ? 1.0 : 0.0));
        out.per_sample[i] += asym * nn::huber(u, kappa) / kappa * pair_norm;
        grad_acc -= asym * nn::huber_derivative(u, kappa) / kappa * pair_norm;
      }
      out.grad(i, p) = w * grad_acc / batch;
    }
    out.value += w * out.per_sample[i] / batch;
  }
  return out;
}

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<std::uint8_t>& dones, double gamma, double lambda) {
  const std::size_t t_len = rewards.size();
  if (values.size() != t_len + 1)
    throw DimensionError("gae: values must carry one bootstrap entry beyond the rewards");
  if (dones.size() != t_len) throw DimensionError("gae: rewards and dones differ in length");

  GaeResult out;
  out.advantages.assign(t_len, 0.0);
  out.returns.assign(t_len, 0.0);
  double running = 0.0;
  for (int t = static_cast<int>(t_len) - 1; t >= 0; --t) {
    const double cont = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * cont * values[t + 1] - values[t];
    running = delta + gamma * lambda * cont * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[t] + gamma * acc;
    out[t] = acc;
  }
  return out;
}

void whiten(std::vector<double>& xs, double eps) {
  if (xs.empty()) return;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size();
  const double stddev = std::sqrt(var) + eps;
  for (double& x : xs) x = (x - mean) / stddev;
}

}  // namespace relab::agent
