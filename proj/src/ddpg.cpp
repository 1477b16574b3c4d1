#include "relab/agent/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "relab/error.hpp"

namespace relab::agent {

DdpgAgent::DdpgAgent(std::string name, const env::EnvSpec& env_spec, DdpgOptions opts)
    : Agent(std::move(name)),
      opts_(std::move(opts)),
      obs_dim_(env_spec.obs_dim),
      act_dim_(static_cast<int>(env_spec.action_low.size())),
      low_(env_spec.action_low),
      high_(env_spec.action_high),
      replay_(opts_.buffer_size) {
  if (env_spec.action_type != env::ActionType::continuous)
    throw ConfigError("agent '" + name_ + "' requires a continuous action space");
  if (opts_.tau <= 0.0 || opts_.tau > 1.0)
    throw ConfigError("agent '" + name_ + "': tau must lie in (0, 1]");
  for (int d = 0; d < act_dim_; ++d)
    noise_std_.push_back(opts_.noise_sigma * (high_[d] - low_[d]));

  net::NetworkSpec actor_spec;
  actor_spec.in_dim = obs_dim_;
  actor_spec.out_dim = act_dim_;
  actor_spec.hidden = opts_.hidden;
  actor_spec.action_low = low_;
  actor_spec.action_high = high_;
  actor_ = net::build_network("deterministic_policy_network", actor_spec);

  net::NetworkSpec critic_spec;
  critic_spec.in_dim = obs_dim_ + act_dim_;
  critic_spec.hidden = opts_.hidden;
  critic_ = net::build_network("state_action_q_network", critic_spec);

  Rng init_rng(Rng::derive(7, stream::kInit, 0));
  actor_->init(init_rng);
  critic_->init(init_rng);
  actor_target_ = actor_->clone();
  critic_target_ = critic_->clone();

  actor_optimizer_ = nn::make_optimizer(opts_.optim_name, actor_->parameters(), opts_.actor_lr);
  critic_optimizer_ = nn::make_optimizer(opts_.optim_name, critic_->parameters(), opts_.lr);
}

ActInfo DdpgAgent::act(const std::vector<double>& state, long /*step*/, bool training) {
  if (static_cast<int>(state.size()) != obs_dim_)
    throw DimensionError("agent '" + name_ + "': state width does not match observation");
  nn::Matrix x(1, obs_dim_);
  for (int i = 0; i < obs_dim_; ++i) x(0, i) = state[i];
  const nn::Matrix a = actor_->forward(x, false);
  if (!nn::all_finite(a))
    throw StateError("agent '" + name_ + "': network produced a non-finite action value");

  std::vector<double> values(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    double v = a(0, d);
    if (training) v += noise_std_[d] * act_rng_.normal();
    values[d] = std::clamp(v, low_[d], high_[d]);
  }
  ActInfo info;
  info.action = buffer::Action::make_continuous(std::move(values));
  return info;
}

void DdpgAgent::store(const buffer::Transition& t) { replay_.store(t); }

nn::Matrix DdpgAgent::concat_state_action(const nn::Matrix& states,
                                          const nn::Matrix& actions) const {
  nn::Matrix joint(states.rows(), obs_dim_ + act_dim_);
  for (int i = 0; i < states.rows(); ++i) {
    for (int j = 0; j < obs_dim_; ++j) joint(i, j) = states(i, j);
    for (int d = 0; d < act_dim_; ++d) joint(i, obs_dim_ + d) = actions(i, d);
  }
  return joint;
}

double DdpgAgent::critic_value(const std::vector<double>& state,
                               const std::vector<double>& action) {
  nn::Matrix joint(1, obs_dim_ + act_dim_);
  for (int j = 0; j < obs_dim_; ++j) joint(0, j) = state[j];
  for (int d = 0; d < act_dim_; ++d) joint(0, obs_dim_ + d) = action[d];
  return critic_->forward(joint, false)(0, 0);
}

LearnStats DdpgAgent::learn(long step) {
  if (step < opts_.start_train_step || replay_.size() < opts_.batch_size) return {};
  const auto batch = replay_.sample(opts_.batch_size, learn_rng_);
  return learn_on_batch(batch);
}

LearnStats DdpgAgent::learn_on_batch(const std::vector<buffer::Transition>& batch) {
  if (batch.empty()) throw ParameterError("agent '" + name_ + "': empty learn batch");
  const int b = static_cast<int>(batch.size());

  nn::Matrix s(b, obs_dim_), s_next(b, obs_dim_), a(b, act_dim_);
  for (int i = 0; i < b; ++i) {
    if (static_cast<int>(batch[i].state.size()) != obs_dim_ ||
        static_cast<int>(batch[i].action.values.size()) != act_dim_)
      throw DimensionError("agent '" + name_ + "': transition width mismatch");
    for (int j = 0; j < obs_dim_; ++j) {
      s(i, j) = batch[i].state[j];
      s_next(i, j) = batch[i].next_state[j];
    }
    for (int d = 0; d < act_dim_; ++d) a(i, d) = batch[i].action.values[d];
  }

  // critic: regress toward the frozen-target bootstrap value
  const nn::Matrix a_next = actor_target_->forward(s_next, false);
  const nn::Matrix q_next = critic_target_->forward(concat_state_action(s_next, a_next), false);
  const nn::Matrix q = critic_->forward(concat_state_action(s, a), false);

  nn::Matrix dq(b, 1);
  double critic_loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const double y =
        batch[i].reward + (batch[i].done ? 0.0 : opts_.gamma) * q_next(i, 0);
    const double err = q(i, 0) - y;
    critic_loss += err * err / b;
    dq(i, 0) = 2.0 * err / b;
  }
  critic_->backward(dq);
  critic_optimizer_->step();

  // actor: ascend the critic's value of the actor's own actions. The backward
  // pass runs through the critic only to reach d q / d action, so the critic
  // gradients it deposits are discarded afterwards.
  const nn::Matrix a_pi = actor_->forward(s, false);
  const nn::Matrix q_pi = critic_->forward(concat_state_action(s, a_pi), false);
  nn::Matrix dq_pi(b, 1);
  double actor_loss = 0.0;
  for (int i = 0; i < b; ++i) {
    actor_loss -= q_pi(i, 0) / b;
    dq_pi(i, 0) = -1.0 / b;
  }
  const nn::Matrix djoint = critic_->backward(dq_pi);
  critic_optimizer_->zero_grad();
  nn::Matrix da(b, act_dim_);
  for (int i = 0; i < b; ++i)
    for (int d = 0; d < act_dim_; ++d) da(i, d) = djoint(i, obs_dim_ + d);
  actor_->backward(da);
  actor_optimizer_->step();

  soft_update(*actor_target_, *actor_);
  soft_update(*critic_target_, *critic_);

  LearnStats stats;
  stats.learned = true;
  stats.loss = critic_loss;
  stats.aux["actor_loss"] = actor_loss;
  return stats;
}

void DdpgAgent::soft_update(net::Head& target, net::Head& online) const {
  const auto tp = target.parameters();
  const auto op = online.parameters();
  for (std::size_t k = 0; k < tp.size(); ++k) {
    auto& tv = tp[k]->value;
    const auto& ov = op[k]->value;
    for (int i = 0; i < tv.rows(); ++i)
      for (int j = 0; j < tv.cols(); ++j)
        tv(i, j) = opts_.tau * ov(i, j) + (1.0 - opts_.tau) * tv(i, j);
  }
}

void DdpgAgent::export_state(logging::StateMap& out) {
  out.sections["actor"] = nn::export_values(actor_->parameters());
  out.sections["critic"] = nn::export_values(critic_->parameters());
  out.sections["actor_target"] = nn::export_values(actor_target_->parameters());
  out.sections["critic_target"] = nn::export_values(critic_target_->parameters());
  const auto save_optim = [&out](const char* key, nn::Optimizer& opt) {
    std::vector<nn::Matrix> blocks;
    std::vector<double> scalars;
    opt.export_state(blocks, scalars);
    out.sections[key] = std::move(blocks);
    for (std::size_t i = 0; i < scalars.size(); ++i)
      out.scalars[std::string(key) + "." + std::to_string(i)] = scalars[i];
  };
  save_optim("actor_optim", *actor_optimizer_);
  save_optim("critic_optim", *critic_optimizer_);
  export_rngs(out);
}

void DdpgAgent::import_state(const logging::StateMap& in) {
  nn::import_values(actor_->parameters(), in.sections.at("actor"));
  nn::import_values(critic_->parameters(), in.sections.at("critic"));
  nn::import_values(actor_target_->parameters(), in.sections.at("actor_target"));
  nn::import_values(critic_target_->parameters(), in.sections.at("critic_target"));
  const auto load_optim = [&in](const char* key, nn::Optimizer& opt) {
    std::vector<double> scalars;
    for (std::size_t i = 0; in.scalars.count(std::string(key) + "." + std::to_string(i)); ++i)
      scalars.push_back(in.scalars.at(std::string(key) + "." + std::to_string(i)));
    opt.import_state(in.sections.at(key), scalars);
  };
  load_optim("actor_optim", *actor_optimizer_);
  load_optim("critic_optim", *critic_optimizer_);
  import_rngs(in);
}

}  // namespace relab::agent
