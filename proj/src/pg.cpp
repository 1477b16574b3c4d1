#include "relab/agent/pg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relab/error.hpp"

namespace relab::agent {

std::vector<double> softmax_row(const nn::Matrix& logits, int row, int n) {
  double max_logit = logits(row, 0);
  for (int a = 1; a < n; ++a) max_logit = std::max(max_logit, logits(row, a));
  std::vector<double> p(n);
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    p[a] = std::exp(logits(row, a) - max_logit);
    sum += p[a];
  }
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

nn::Matrix single_row(const std::vector<double>& state, int obs_dim,
                      const std::string& name) {
  if (static_cast<int>(state.size()) != obs_dim)
    throw DimensionError("agent '" + name + "': state width does not match observation");
  nn::Matrix x(1, obs_dim);
  for (int i = 0; i < obs_dim; ++i) x(0, i) = state[i];
  return x;
}

int sample_categorical(const std::vector<double>& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    acc += p[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(p.size()) - 1;
}

int argmax(const std::vector<double>& xs) {
  int best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[best]) best = static_cast<int>(i);
  return best;
}

nn::Matrix stack_states(const std::vector<buffer::Transition>& batch, int obs_dim,
                        const std::string& name) {
  nn::Matrix m(static_cast<int>(batch.size()), obs_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<int>(batch[i].state.size()) != obs_dim)
      throw DimensionError("agent '" + name + "': transition state width mismatch");
    for (int j = 0; j < obs_dim; ++j) m(static_cast<int>(i), j) = batch[i].state[j];
  }
  return m;
}

}  // namespace

ReinforceAgent::ReinforceAgent(std::string name, const env::EnvSpec& env_spec,
                               ReinforceOptions opts)
    : Agent(std::move(name)),
      opts_(std::move(opts)),
      obs_dim_(env_spec.obs_dim),
      n_actions_(env_spec.n_actions) {
  if (env_spec.action_type != env::ActionType::discrete)
    throw ConfigError("agent '" + name_ + "' requires a discrete action space");

  net::NetworkSpec spec;
  spec.in_dim = obs_dim_;
  spec.n_actions = n_actions_;
  spec.hidden = opts_.hidden;
  policy_ = net::build_network("discrete_policy_network", spec);
  Rng init_rng(Rng::derive(7, stream::kInit, 0));
  policy_->init(init_rng);
  optimizer_ = nn::make_optimizer(opts_.optim_name, policy_->parameters(), opts_.lr);
}

ActInfo ReinforceAgent::act(const std::vector<double>& state, long /*step*/, bool training) {
  const nn::Matrix logits = policy_->forward(single_row(state, obs_dim_, name_), false);
  if (!nn::all_finite(logits))
    throw StateError("agent '" + name_ + "': network produced a non-finite action value");
  const std::vector<double> p = softmax_row(logits, 0, n_actions_);
  const int a = training ? sample_categorical(p, act_rng_) : argmax(p);
  ActInfo info;
  info.action = buffer::Action::make_discrete(a);
  info.logprob = std::log(std::max(p[a], 1e-12));
  return info;
}

void ReinforceAgent::store(const buffer::Transition& t) {
  auto& episode = open_episodes_[t.actor_id];
  episode.push_back(t);
  if (t.done || t.truncated) {
    ready_.push_back(std::move(episode));
    open_episodes_.erase(t.actor_id);
  }
}

LearnStats ReinforceAgent::learn(long /*step*/) {
  LearnStats stats;
  while (!ready_.empty()) {
    stats = learn_on_episode(ready_.front());
    ready_.pop_front();
  }
  return stats;
}

LearnStats ReinforceAgent::learn_on_episode(const std::vector<buffer::Transition>& episode) {
  if (episode.empty()) throw ParameterError("agent '" + name_ + "': empty episode");
  const int t_len = static_cast<int>(episode.size());

  std::vector<double> rewards(t_len);
  for (int t = 0; t < t_len; ++t) rewards[t] = episode[t].reward;
  std::vector<double> g = discounted_returns(rewards, opts_.gamma);
  whiten(g);

  const nn::Matrix states = stack_states(episode, obs_dim_, name_);
  const nn::Matrix logits = policy_->forward(states, false);

  // loss = -sum_t log pi(a_t) * G_t ; dlogit = -G_t * (1{a} - p)
  nn::Matrix dlogits(t_len, n_actions_);
  double loss = 0.0;
  for (int t = 0; t < t_len; ++t) {
    const std::vector<double> p = softmax_row(logits, t, n_actions_);
    const int a = episode[t].action.index;
    loss -= g[t] * std::log(std::max(p[a], 1e-12));
    for (int m = 0; m < n_actions_; ++m)
      dlogits(t, m) = -g[t] * ((m == a ? 1.0 : 0.0) - p[m]);
  }
  policy_->backward(dlogits);
  optimizer_->step();

  LearnStats stats;
  stats.learned = true;
  stats.loss = loss;
  stats.aux["episode_len"] = t_len;
  return stats;
}

void ReinforceAgent::export_state(logging::StateMap& out) {
  out.sections["policy"] = nn::export_values(policy_->parameters());
  std::vector<nn::Matrix> blocks;
  std::vector<double> scalars;
  optimizer_->export_state(blocks, scalars);
  out.sections["optim"] = std::move(blocks);
  for (std::size_t i = 0; i < scalars.size(); ++i)
    out.scalars["optim." + std::to_string(i)] = scalars[i];
  export_rngs(out);
}

void ReinforceAgent::import_state(const logging::StateMap& in) {
  nn::import_values(policy_->parameters(), in.sections.at("policy"));
  std::vector<double> scalars;
  for (std::size_t i = 0; in.scalars.count("optim." + std::to_string(i)); ++i)
    scalars.push_back(in.scalars.at("optim." + std::to_string(i)));
  optimizer_->import_state(in.sections.at("optim"), scalars);
  import_rngs(in);
}

PpoLossResult ppo_surrogate(const nn::Matrix& out, const std::vector<int>& actions,
                            const std::vector<double>& old_logprobs,
                            const std::vector<double>& advantages,
                            const std::vector<double>& returns, double clip_ratio,
                            double vf_coef, double ent_coef) {
  const int b = out.rows();
  const int n_actions = out.cols() - 1;
  if (static_cast<int>(actions.size()) != b || static_cast<int>(old_logprobs.size()) != b ||
      static_cast<int>(advantages.size()) != b || static_cast<int>(returns.size()) != b)
    throw DimensionError("ppo surrogate: batch annotation lengths disagree");

  PpoLossResult res;
  res.grad = nn::Matrix(b, out.cols());
  double loss = 0.0;
  int clipped = 0;
  const double inv_b = 1.0 / b;

  for (int i = 0; i < b; ++i) {
    const std::vector<double> p = softmax_row(out, i, n_actions);
    const int a = actions[i];
    const double logp = std::log(std::max(p[a], 1e-12));
    const double ratio = std::exp(logp - old_logprobs[i]);
    const double adv = advantages[i];

    const double unclipped = ratio * adv;
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    const double clipped_term = clipped_ratio * adv;
    const bool use_unclipped = unclipped <= clipped_term;
    loss -= inv_b * std::min(unclipped, clipped_term);
    if (!use_unclipped) ++clipped;

    double entropy = 0.0;
    for (int m = 0; m < n_actions; ++m)
      if (p[m] > 0.0) entropy -= p[m] * std::log(p[m]);
    res.entropy += inv_b * entropy;
    loss -= ent_coef * inv_b * entropy;

    const double v = out(i, n_actions);
    const double verr = v - returns[i];
    loss += vf_coef * inv_b * verr * verr;
    res.grad(i, n_actions) = vf_coef * inv_b * 2.0 * verr;

    for (int m = 0; m < n_actions; ++m) {
      double d = 0.0;
      if (use_unclipped) {
        // d ratio / d logit_m = ratio * (1{m==a} - p_m)
        d -= inv_b * adv * ratio * ((m == a ? 1.0 : 0.0) - p[m]);
      }
      // d(-entropy)/d logit_m = p_m * (log p_m + entropy)
      d += ent_coef * inv_b * p[m] * (std::log(std::max(p[m], 1e-12)) + entropy);
      res.grad(i, m) = d;
    }
  }
  res.value = loss;
  res.clip_fraction = static_cast<double>(clipped) / b;
  return res;
}

PpoAgent::PpoAgent(std::string name, const env::EnvSpec& env_spec, PpoOptions opts)
    : Agent(std::move(name)),
      opts_(std::move(opts)),
      obs_dim_(env_spec.obs_dim),
      n_actions_(env_spec.n_actions) {
  if (env_spec.action_type != env::ActionType::discrete)
    throw ConfigError("agent '" + name_ + "' requires a discrete action space");
  if (opts_.n_step <= 0 || opts_.batch_size <= 0)
    throw ConfigError("agent '" + name_ + "': n_step and batch_size must be positive");

  net::NetworkSpec spec;
  spec.in_dim = obs_dim_;
  spec.n_actions = n_actions_;
  spec.hidden = opts_.hidden;
  net_ = net::build_network("discrete_policy_value_network", spec);
  Rng init_rng(Rng::derive(7, stream::kInit, 0));
  net_->init(init_rng);
  optimizer_ = nn::make_optimizer(opts_.optim_name, net_->parameters(), opts_.lr);
}

ActInfo PpoAgent::act(const std::vector<double>& state, long /*step*/, bool training) {
  const nn::Matrix out = net_->forward(single_row(state, obs_dim_, name_), false);
  if (!nn::all_finite(out))
    throw StateError("agent '" + name_ + "': network produced a non-finite action value");
  const std::vector<double> p = softmax_row(out, 0, n_actions_);
  const int a = training ? sample_categorical(p, act_rng_) : argmax(p);
  ActInfo info;
  info.action = buffer::Action::make_discrete(a);
  info.logprob = std::log(std::max(p[a], 1e-12));
  info.value = out(0, n_actions_);
  return info;
}

void PpoAgent::store(const buffer::Transition& t) { rollout_.push_back(t); }

LearnStats PpoAgent::learn(long /*step*/) {
  if (static_cast<int>(rollout_.size()) < opts_.n_step) return {};
  std::vector<buffer::Transition> drained;
  drained.swap(rollout_);
  return learn_on_rollout(drained);
}

double PpoAgent::state_value(const std::vector<double>& state) {
  const nn::Matrix out = net_->forward(single_row(state, obs_dim_, name_), false);
  return out(0, n_actions_);
}

LearnStats PpoAgent::learn_on_rollout(const std::vector<buffer::Transition>& rollout) {
  if (rollout.empty()) throw ParameterError("agent '" + name_ + "': empty rollout");
  const int n = static_cast<int>(rollout.size());

  // Advantage estimation runs per actor segment: transitions are grouped by
  // actor in arrival order and segments end at done/truncated or batch cut.
  // Non-terminal segment ends bootstrap with the current value function.
  std::vector<double> advantages(n), returns(n);
  std::map<int, std::vector<int>> by_actor;
  for (int i = 0; i < n; ++i) by_actor[rollout[i].actor_id].push_back(i);

  for (const auto& [actor, indices] : by_actor) {
    std::size_t start = 0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const auto& t = rollout[indices[k]];
      const bool cut = t.done || t.truncated || k + 1 == indices.size();
      if (!cut) continue;

      const std::size_t len = k - start + 1;
      std::vector<double> rs(len), vs(len + 1);
      std::vector<std::uint8_t> ds(len);
      for (std::size_t j = 0; j < len; ++j) {
        const auto& tr = rollout[indices[start + j]];
        rs[j] = tr.reward;
        vs[j] = tr.value;
        ds[j] = tr.done ? 1 : 0;
      }
      vs[len] = t.done ? 0.0 : state_value(t.next_state);

      const GaeResult g = gae(rs, vs, ds, opts_.gamma, opts_.gae_lambda);
      for (std::size_t j = 0; j < len; ++j) {
        advantages[indices[start + j]] = g.advantages[j];
        returns[indices[start + j]] = g.returns[j];
      }
      start = k + 1;
    }
  }
  whiten(advantages);

  const nn::Matrix states = stack_states(rollout, obs_dim_, name_);
  std::vector<int> actions(n);
  std::vector<double> old_logprobs(n);
  for (int i = 0; i < n; ++i) {
    actions[i] = rollout[i].action.index;
    old_logprobs[i] = rollout[i].logprob;
  }

  LearnStats stats;
  stats.learned = true;
  double loss_sum = 0.0, clip_sum = 0.0, entropy_sum = 0.0;
  int updates = 0;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < opts_.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[learn_rng_.uniform_int(i + 1)]);

    for (int lo = 0; lo < n; lo += opts_.batch_size) {
      const int hi = std::min(n, lo + opts_.batch_size);
      const int m = hi - lo;
      nn::Matrix xs(m, obs_dim_);
      std::vector<int> acts(m);
      std::vector<double> olps(m), advs(m), rets(m);
      for (int j = 0; j < m; ++j) {
        const int src = order[lo + j];
        for (int c = 0; c < obs_dim_; ++c) xs(j, c) = states(src, c);
        acts[j] = actions[src];
        olps[j] = old_logprobs[src];
        advs[j] = advantages[src];
        rets[j] = returns[src];
      }

      const nn::Matrix out = net_->forward(xs, false);
      PpoLossResult res = ppo_surrogate(out, acts, olps, advs, rets, opts_.clip_ratio,
                                        opts_.vf_coef, opts_.ent_coef);
      net_->backward(res.grad);
      nn::clip_grad_norm(net_->parameters(), opts_.grad_clip);
      optimizer_->step();

      loss_sum += res.value;
      clip_sum += res.clip_fraction;
      entropy_sum += res.entropy;
      ++updates;
    }
  }

  stats.loss = loss_sum / updates;
  stats.aux["clip_fraction"] = clip_sum / updates;
  stats.aux["entropy"] = entropy_sum / updates;
  return stats;
}

void PpoAgent::export_state(logging::StateMap& out) {
  out.sections["net"] = nn::export_values(net_->parameters());
  std::vector<nn::Matrix> blocks;
  std::vector<double> scalars;
  optimizer_->export_state(blocks, scalars);
  out.sections["optim"] = std::move(blocks);
  for (std::size_t i = 0; i < scalars.size(); ++i)
    out.scalars["optim." + std::to_string(i)] = scalars[i];
  export_rngs(out);
}

void PpoAgent::import_state(const logging::StateMap& in) {
  nn::import_values(net_->parameters(), in.sections.at("net"));
  std::vector<double> scalars;
  for (std::size_t i = 0; in.scalars.count("optim." + std::to_string(i)); ++i)
    scalars.push_back(in.scalars.at("optim." + std::to_string(i)));
  optimizer_->import_state(in.sections.at("optim"), scalars);
  import_rngs(in);
}

}  // namespace relab::agent
