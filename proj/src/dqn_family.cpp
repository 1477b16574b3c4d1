#include "relab/agent/dqn_family.hpp"

#include <algorithm>
#include <cmath>

#include "relab/error.hpp"
#include "relab/nn/losses.hpp"

namespace relab::agent {

EpsilonSchedule::EpsilonSchedule(double init, double min, long decay_steps)
    : init_(init), min_(min), decay_steps_(decay_steps) {
  if (init < min) throw ParameterError("epsilon schedule: init must be >= min");
  if (decay_steps < 0) throw ParameterError("epsilon schedule: decay steps must be >= 0");
}

double EpsilonSchedule::operator()(long step) const {
  if (step < 0) step = 0;
  if (decay_steps_ == 0 || step >= decay_steps_) return min_;
  return init_ - (init_ - min_) * static_cast<double>(step) / decay_steps_;
}

DqnFamilyAgent::DqnFamilyAgent(std::string name, const env::EnvSpec& env_spec,
                               DqnOptions opts)
    : Agent(std::move(name)),
      opts_(std::move(opts)),
      obs_dim_(env_spec.obs_dim),
      n_actions_(env_spec.n_actions),
      epsilon_(opts_.epsilon_init, opts_.epsilon_min,
               static_cast<long>(opts_.explore_ratio * opts_.run_step)) {
  if (env_spec.action_type != env::ActionType::discrete)
    throw ConfigError("agent '" + name_ + "' requires a discrete action space");
  if (opts_.gamma < 0.0 || opts_.gamma > 1.0)
    throw ConfigError("agent '" + name_ + "': gamma must lie in [0, 1]");
  if (opts_.batch_size <= 0) throw ConfigError("agent '" + name_ + "': batch_size must be positive");

  // one atom degenerates every distributional head to the scalar q path
  if (opts_.dist != DqnOptions::Dist::scalar && opts_.n_atoms == 1)
    opts_.dist = DqnOptions::Dist::scalar;

  net::NetworkSpec spec;
  spec.in_dim = obs_dim_;
  spec.n_actions = n_actions_;
  spec.hidden = opts_.hidden;
  spec.sigma_init = opts_.sigma_init;
  spec.n_atoms = opts_.dist == DqnOptions::Dist::scalar ? 1 : opts_.n_atoms;
  spec.out_dim = n_actions_ * spec.n_atoms;
  online_ = net::build_network(opts_.network, spec);

  if (opts_.dist == DqnOptions::Dist::categorical) {
    support_.emplace(opts_.v_min, opts_.v_max, opts_.n_atoms);
  } else if (opts_.dist == DqnOptions::Dist::quantile) {
    taus_ = net::quantile_taus(opts_.n_atoms);
  }

  if (opts_.buffer == "replay") {
    replay_.emplace(opts_.buffer_size);
  } else if (opts_.buffer == "per") {
    per_.emplace(opts_.buffer_size, opts_.per_alpha, opts_.per_epsilon);
  } else {
    throw ConfigError("agent '" + name_ + "': buffer must be 'replay' or 'per', got '" +
                      opts_.buffer + "'");
  }

  Rng init_rng(Rng::derive(7, stream::kInit, 0));
  online_->init(init_rng);
  target_ = online_->clone();
  optimizer_ = nn::make_optimizer(opts_.optim_name, online_->parameters(), opts_.lr);
}

std::vector<double> DqnFamilyAgent::q_from_output(const nn::Matrix& out, int row) const {
  std::vector<double> q(n_actions_, 0.0);
  switch (opts_.dist) {
    case DqnOptions::Dist::scalar:
      for (int a = 0; a < n_actions_; ++a) q[a] = out(row, a);
      break;
    case DqnOptions::Dist::categorical: {
      const nn::Matrix probs = net::categorical_probs(out, n_actions_, opts_.n_atoms);
      for (int a = 0; a < n_actions_; ++a)
        for (int z = 0; z < opts_.n_atoms; ++z)
          q[a] += probs(row, a * opts_.n_atoms + z) * support_->atoms[z];
      break;
    }
    case DqnOptions::Dist::quantile:
      for (int a = 0; a < n_actions_; ++a) {
        double mean = 0.0;
        for (int z = 0; z < opts_.n_atoms; ++z) mean += out(row, a * opts_.n_atoms + z);
        q[a] = mean / opts_.n_atoms;
      }
      break;
  }
  return q;
}

std::vector<double> DqnFamilyAgent::q_values(const std::vector<double>& state) {
  nn::Matrix x(1, obs_dim_);
  for (int i = 0; i < obs_dim_; ++i) x(0, i) = state[i];
  const nn::Matrix out = online_->forward(x, false);
  return q_from_output(out, 0);
}

ActInfo DqnFamilyAgent::act(const std::vector<double>& state, long step, bool training) {
  if (static_cast<int>(state.size()) != obs_dim_)
    throw DimensionError("agent '" + name_ + "': state width does not match observation");

  nn::Matrix x(1, obs_dim_);
  for (int i = 0; i < obs_dim_; ++i) x(0, i) = state[i];

  const bool noisy = online_->noisy();
  if (training && noisy) online_->resample_noise(act_rng_);

  // noisy nets explore through weight noise; everything else is epsilon-greedy
  if (training && !noisy) {
    const double eps = epsilon_(step);
    if (act_rng_.uniform() < eps) {
      ActInfo info;
      info.action =
          buffer::Action::make_discrete(static_cast<int>(act_rng_.uniform_int(n_actions_)));
      return info;
    }
  }

  const nn::Matrix out = online_->forward(x, training && noisy);
  if (!nn::all_finite(out))
    throw StateError("agent '" + name_ + "': network produced a non-finite action value");
  const std::vector<double> q = q_from_output(out, 0);
  int best = 0;
  for (int a = 1; a < n_actions_; ++a)
    if (q[a] > q[best]) best = a;

  ActInfo info;
  info.action = buffer::Action::make_discrete(best);
  info.value = q[best];
  return info;
}

void DqnFamilyAgent::store(const buffer::Transition& t) {
  auto deliver = [&](const buffer::Transition& block) {
    if (replay_)
      replay_->store(block);
    else
      per_->store(block);
  };
  if (opts_.n_step <= 1) {
    deliver(t);
    return;
  }
  auto [it, inserted] =
      multistep_.try_emplace(t.actor_id, opts_.n_step, opts_.gamma);
  if (const auto block = it->second.push(t)) deliver(*block);
}

double DqnFamilyAgent::beta(long step) const {
  const double frac = std::min(1.0, static_cast<double>(step) / opts_.run_step);
  return opts_.per_beta_init + (1.0 - opts_.per_beta_init) * frac;
}

void DqnFamilyAgent::sync_target() {
  nn::import_values(target_->parameters(), nn::export_values(online_->parameters()));
}

LearnStats DqnFamilyAgent::learn(long step) {
  const int stored = replay_ ? replay_->size() : per_->size();
  if (step < opts_.start_train_step || stored < opts_.batch_size) return {};

  LearnStats stats;
  std::vector<double> per_sample;
  if (per_) {
    const double b = beta(step);
    buffer::PerSample batch = per_->sample(opts_.batch_size, b, learn_rng_);
    stats = learn_on_batch(batch.transitions, &batch.weights, &per_sample);
    per_->update_priorities(batch.indices, per_sample);
    stats.aux["beta"] = b;
  } else {
    const auto batch = replay_->sample(opts_.batch_size, learn_rng_);
    stats = learn_on_batch(batch, nullptr, nullptr);
  }

  if (!online_->noisy()) stats.aux["epsilon"] = epsilon_(step);
  if (step - last_target_sync_ >= opts_.target_update_period) {
    sync_target();
    last_target_sync_ = step;
  }
  return stats;
}

nn::Matrix DqnFamilyAgent::states_matrix(const std::vector<buffer::Transition>& batch,
                                         bool next) const {
  nn::Matrix m(static_cast<int>(batch.size()), obs_dim_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = next ? batch[i].next_state : batch[i].state;
    if (static_cast<int>(s.size()) != obs_dim_)
      throw DimensionError("agent '" + name_ + "': transition state width mismatch");
    for (int j = 0; j < obs_dim_; ++j) m(static_cast<int>(i), j) = s[j];
  }
  return m;
}

LearnStats DqnFamilyAgent::learn_on_batch(const std::vector<buffer::Transition>& batch,
                                          const std::vector<double>* weights,
                                          std::vector<double>* per_sample_out) {
  if (batch.empty()) throw ParameterError("agent '" + name_ + "': empty learn batch");
  const int b = static_cast<int>(batch.size());
  const bool noisy = online_->noisy();

  std::vector<double> rewards(b);
  std::vector<std::uint8_t> dones(b);
  std::vector<int> n_steps(b);
  for (int i = 0; i < b; ++i) {
    rewards[i] = batch[i].reward;
    dones[i] = batch[i].done ? 1 : 0;
    n_steps[i] = batch[i].n_steps;
  }

  const nn::Matrix s = states_matrix(batch, false);
  const nn::Matrix s_next = states_matrix(batch, true);

  if (noisy) {
    online_->resample_noise(learn_rng_);
    target_->resample_noise(learn_rng_);
  }

  LearnStats stats;
  stats.learned = true;
  std::vector<double> per_sample(b, 0.0);

  if (opts_.dist == DqnOptions::Dist::scalar) {
    const nn::Matrix q_next_target = target_->forward(s_next, noisy);
    std::vector<double> y;
    if (opts_.double_target) {
      const nn::Matrix q_next_online = online_->forward(s_next, noisy);
      y = double_dqn_target(rewards, dones, n_steps, opts_.gamma, q_next_online,
                            q_next_target);
    } else {
      y = dqn_target(rewards, dones, n_steps, opts_.gamma, q_next_target);
    }

    const nn::Matrix q_all = online_->forward(s, noisy);
    nn::Matrix pred(b, 1), target(b, 1);
    for (int i = 0; i < b; ++i) {
      pred(i, 0) = q_all(i, batch[i].action.index);
      target(i, 0) = y[i];
      per_sample[i] = std::abs(y[i] - pred(i, 0));
    }
    const auto loss = nn::huber_loss(pred, target, opts_.huber_kappa, weights);
    nn::Matrix dq(b, n_actions_);
    for (int i = 0; i < b; ++i) dq(i, batch[i].action.index) = loss.grad(i, 0);
    online_->backward(dq);
    stats.loss = loss.value;
  } else if (opts_.dist == DqnOptions::Dist::categorical) {
    const int z = opts_.n_atoms;
    const nn::Matrix target_logits = target_->forward(s_next, noisy);
    const nn::Matrix target_probs = net::categorical_probs(target_logits, n_actions_, z);

    // action selection: online net when double targets are on, else target net
    const nn::Matrix* select_probs = &target_probs;
    nn::Matrix online_next_probs;
    if (opts_.double_target) {
      online_next_probs =
          net::categorical_probs(online_->forward(s_next, noisy), n_actions_, z);
      select_probs = &online_next_probs;
    }

    nn::Matrix projected(b, z);
    for (int i = 0; i < b; ++i) {
      int best = 0;
      double best_q = -1e300;
      for (int a = 0; a < n_actions_; ++a) {
        double q = 0.0;
        for (int k = 0; k < z; ++k) q += (*select_probs)(i, a * z + k) * support_->atoms[k];
        if (q > best_q) {
          best_q = q;
          best = a;
        }
      }
      c51_project(rewards[i], dones[i] != 0, std::pow(opts_.gamma, n_steps[i]), *support_,
                  target_probs.row(i) + best * z, projected.row(i));
    }

    std::vector<int> actions(b);
    for (int i = 0; i < b; ++i) actions[i] = batch[i].action.index;
    const nn::Matrix logits = online_->forward(s, noisy);
    const auto loss = categorical_ce_loss(logits, projected, actions, n_actions_, z, weights);
    online_->backward(loss.grad);
    stats.loss = loss.value;
    per_sample = loss.per_sample;
  } else {
    const int n = opts_.n_atoms;
    const nn::Matrix next_out_target = target_->forward(s_next, noisy);
    const nn::Matrix* select = &next_out_target;
    nn::Matrix next_out_online;
    if (opts_.double_target) {
      next_out_online = online_->forward(s_next, noisy);
      select = &next_out_online;
    }

    nn::Matrix theta_target(b, n);
    for (int i = 0; i < b; ++i) {
      int best = 0;
      double best_q = -1e300;
      for (int a = 0; a < n_actions_; ++a) {
        double mean = 0.0;
        for (int k = 0; k < n; ++k) mean += (*select)(i, a * n + k);
        if (mean / n > best_q) {
          best_q = mean / n;
          best = a;
        }
      }
      const double cont = dones[i] ? 0.0 : std::pow(opts_.gamma, n_steps[i]);
      for (int k = 0; k < n; ++k)
        theta_target(i, k) = rewards[i] + cont * next_out_target(i, best * n + k);
    }

    const nn::Matrix out = online_->forward(s, noisy);
    nn::Matrix theta_pred(b, n);
    for (int i = 0; i < b; ++i)
      for (int k = 0; k < n; ++k)
        theta_pred(i, k) = out(i, batch[i].action.index * n + k);

    const auto loss = quantile_huber_loss(theta_pred, theta_target, taus_,
                                          opts_.huber_kappa, weights);
    nn::Matrix dout(b, n_actions_ * n);
    for (int i = 0; i < b; ++i)
      for (int k = 0; k < n; ++k)
        dout(i, batch[i].action.index * n + k) = loss.grad(i, k);
    online_->backward(dout);
    stats.loss = loss.value;
    per_sample = loss.per_sample;
  }

  optimizer_->step();
  if (per_sample_out) *per_sample_out = std::move(per_sample);
  return stats;
}

void DqnFamilyAgent::export_state(logging::StateMap& out) {
  out.sections["online"] = nn::export_values(online_->parameters());
  out.sections["target"] = nn::export_values(target_->parameters());
  std::vector<nn::Matrix> opt_blocks;
  std::vector<double> opt_scalars;
  optimizer_->export_state(opt_blocks, opt_scalars);
  out.sections["optim"] = std::move(opt_blocks);
  for (std::size_t i = 0; i < opt_scalars.size(); ++i)
    out.scalars["optim." + std::to_string(i)] = opt_scalars[i];
  out.scalars["last_target_sync"] = static_cast<double>(last_target_sync_);
  export_rngs(out);
}

void DqnFamilyAgent::import_state(const logging::StateMap& in) {
  nn::import_values(online_->parameters(), in.sections.at("online"));
  nn::import_values(target_->parameters(), in.sections.at("target"));
  std::vector<double> opt_scalars;
  for (std::size_t i = 0; in.scalars.count("optim." + std::to_string(i)); ++i)
    opt_scalars.push_back(in.scalars.at("optim." + std::to_string(i)));
  optimizer_->import_state(in.sections.at("optim"), opt_scalars);
  last_target_sync_ = static_cast<long>(in.scalars.at("last_target_sync"));
  import_rngs(in);
}

}  // namespace relab::agent
