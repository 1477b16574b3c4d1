#include "relab/agent/registry.hpp"

#include <algorithm>
#include <sstream>

#include "relab/agent/ddpg.hpp"
#include "relab/agent/dqn_family.hpp"
#include "relab/agent/pg.hpp"
#include "relab/error.hpp"

namespace relab::agent {

namespace {

const std::vector<std::string> kScalarQNetworks = {
    "discrete_q_network", "dueling_q_network", "noisy_q_network",
    "noisy_dueling_q_network"};
const std::vector<std::string> kCategoricalNetworks = {
    "categorical_q_network", "noisy_dueling_categorical_q_network"};

void check_network(const std::string& agent, const std::string& network,
                   const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), network) != allowed.end()) return;
  std::ostringstream msg;
  msg << "agent '" << agent << "' cannot drive network '" << network << "'; expected one of:";
  for (const auto& name : allowed) msg << " " << name;
  throw ConfigError(msg.str());
}

// agent-table keys shared by every value-based preset
const std::vector<std::string> kDqnKeys = {
    "name",       "network",         "gamma",           "epsilon_init",
    "epsilon_min", "explore_ratio",  "buffer_size",     "batch_size",
    "start_train_step", "target_update_period"};

DqnOptions dqn_options(const config::ConfigTree& cfg, const std::string& default_network) {
  DqnOptions o;
  o.network = cfg.get_string("agent", "network", default_network);
  o.gamma = cfg.get_real("agent", "gamma", o.gamma);
  o.epsilon_init = cfg.get_real("agent", "epsilon_init", o.epsilon_init);
  o.epsilon_min = cfg.get_real("agent", "epsilon_min", o.epsilon_min);
  o.explore_ratio = cfg.get_real("agent", "explore_ratio", o.explore_ratio);
  o.buffer_size = static_cast<int>(cfg.get_int("agent", "buffer_size", o.buffer_size));
  o.batch_size = static_cast<int>(cfg.get_int("agent", "batch_size", o.batch_size));
  o.start_train_step = cfg.get_int("agent", "start_train_step", o.start_train_step);
  o.target_update_period =
      cfg.get_int("agent", "target_update_period", o.target_update_period);
  o.run_step = cfg.get_int("train", "run_step", o.run_step);
  o.optim_name = cfg.get_string("optim", "name", o.optim_name);
  o.lr = cfg.get_real("optim", "lr", o.lr);
  if (o.start_train_step < o.batch_size)
    throw ConfigError("agent: start_train_step must be at least batch_size");
  return o;
}

std::vector<std::string> with(std::vector<std::string> keys,
                              std::initializer_list<const char*> extra) {
  for (const char* k : extra) keys.push_back(k);
  return keys;
}

void read_per(const config::ConfigTree& cfg, DqnOptions& o) {
  o.buffer = "per";
  o.per_alpha = cfg.get_real("agent", "alpha", o.per_alpha);
  o.per_beta_init = cfg.get_real("agent", "beta", o.per_beta_init);
  o.per_epsilon = cfg.get_real("agent", "per_epsilon", o.per_epsilon);
}

void read_categorical(const config::ConfigTree& cfg, DqnOptions& o) {
  o.dist = DqnOptions::Dist::categorical;
  o.n_atoms = static_cast<int>(cfg.get_int("agent", "n_atoms", o.n_atoms));
  o.v_min = cfg.get_real("agent", "v_min", o.v_min);
  o.v_max = cfg.get_real("agent", "v_max", o.v_max);
}

}  // namespace

const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names = {
      "dqn",    "double",  "dueling", "multistep", "per",       "noisy",
      "c51",    "qr_dqn",  "rainbow", "reinforce", "ppo",       "ddpg"};
  return names;
}

std::unique_ptr<Agent> build_agent(const config::ConfigTree& cfg,
                                   const env::EnvSpec& env_spec) {
  const std::string name = cfg.get_string("agent", "name", "dqn");

  if (name == "dqn" || name == "double" || name == "dueling" || name == "multistep" ||
      name == "per" || name == "noisy") {
    std::string default_network = "discrete_q_network";
    if (name == "dueling") default_network = "dueling_q_network";
    if (name == "noisy") default_network = "noisy_q_network";

    DqnOptions o = dqn_options(cfg, default_network);
    auto known = kDqnKeys;
    if (name == "double") o.double_target = true;
    if (name == "multistep") {
      o.n_step = static_cast<int>(cfg.get_int("agent", "n_step", 3));
      known = with(known, {"n_step"});
    }
    if (name == "per") {
      read_per(cfg, o);
      known = with(known, {"alpha", "beta", "per_epsilon"});
    }
    if (o.network.find("noisy") != std::string::npos) {
      o.sigma_init = cfg.get_real("agent", "sigma_init", o.sigma_init);
      known = with(known, {"sigma_init"});
    }
    check_network(name, o.network, kScalarQNetworks);
    config::warn_unknown_keys(cfg, "agent", known);
    return std::make_unique<DqnFamilyAgent>(name, env_spec, o);
  }

  if (name == "c51" || name == "rainbow") {
    const std::string default_network =
        name == "c51" ? "categorical_q_network" : "noisy_dueling_categorical_q_network";
    DqnOptions o = dqn_options(cfg, default_network);
    read_categorical(cfg, o);
    auto known = with(kDqnKeys, {"n_atoms", "v_min", "v_max"});
    if (name == "rainbow") {
      o.double_target = true;
      o.n_step = static_cast<int>(cfg.get_int("agent", "n_step", 3));
      read_per(cfg, o);
      o.sigma_init = cfg.get_real("agent", "sigma_init", o.sigma_init);
      known = with(known, {"n_step", "alpha", "beta", "per_epsilon", "sigma_init"});
    }
    check_network(name, o.network, kCategoricalNetworks);
    config::warn_unknown_keys(cfg, "agent", known);
    return std::make_unique<DqnFamilyAgent>(name, env_spec, o);
  }

  if (name == "qr_dqn") {
    DqnOptions o = dqn_options(cfg, "quantile_q_network");
    o.dist = DqnOptions::Dist::quantile;
    o.n_atoms = static_cast<int>(cfg.get_int("agent", "n_quantiles", o.n_atoms));
    check_network(name, o.network, {"quantile_q_network"});
    config::warn_unknown_keys(cfg, "agent", with(kDqnKeys, {"n_quantiles"}));
    return std::make_unique<DqnFamilyAgent>(name, env_spec, o);
  }

  if (name == "reinforce") {
    ReinforceOptions o;
    o.gamma = cfg.get_real("agent", "gamma", o.gamma);
    o.optim_name = cfg.get_string("optim", "name", o.optim_name);
    o.lr = cfg.get_real("optim", "lr", o.lr);
    check_network(name, cfg.get_string("agent", "network", "discrete_policy_network"),
                  {"discrete_policy_network"});
    config::warn_unknown_keys(cfg, "agent", {"name", "network", "gamma"});
    return std::make_unique<ReinforceAgent>(name, env_spec, o);
  }

  if (name == "ppo") {
    PpoOptions o;
    o.gamma = cfg.get_real("agent", "gamma", o.gamma);
    o.gae_lambda = cfg.get_real("agent", "gae_lambda", o.gae_lambda);
    o.clip_ratio = cfg.get_real("agent", "clip_ratio", o.clip_ratio);
    o.epochs = static_cast<int>(cfg.get_int("agent", "epochs", o.epochs));
    o.n_step = static_cast<int>(cfg.get_int("agent", "n_step", o.n_step));
    o.batch_size = static_cast<int>(cfg.get_int("agent", "batch_size", o.batch_size));
    o.vf_coef = cfg.get_real("agent", "vf_coef", o.vf_coef);
    o.ent_coef = cfg.get_real("agent", "ent_coef", o.ent_coef);
    o.grad_clip = cfg.get_real("agent", "grad_clip", o.grad_clip);
    o.optim_name = cfg.get_string("optim", "name", o.optim_name);
    o.lr = cfg.get_real("optim", "lr", o.lr);
    check_network(name, cfg.get_string("agent", "network", "discrete_policy_value_network"),
                  {"discrete_policy_value_network"});
    config::warn_unknown_keys(
        cfg, "agent",
        {"name", "network", "gamma", "gae_lambda", "clip_ratio", "epochs", "n_step",
         "batch_size", "vf_coef", "ent_coef", "grad_clip"});
    return std::make_unique<PpoAgent>(name, env_spec, o);
  }

  if (name == "ddpg") {
    DdpgOptions o;
    o.gamma = cfg.get_real("agent", "gamma", o.gamma);
    o.tau = cfg.get_real("agent", "tau", o.tau);
    o.noise_sigma = cfg.get_real("agent", "noise_sigma", o.noise_sigma);
    o.buffer_size = static_cast<int>(cfg.get_int("agent", "buffer_size", o.buffer_size));
    o.batch_size = static_cast<int>(cfg.get_int("agent", "batch_size", o.batch_size));
    o.start_train_step = cfg.get_int("agent", "start_train_step", o.start_train_step);
    o.optim_name = cfg.get_string("optim", "name", o.optim_name);
    o.lr = cfg.get_real("optim", "lr", o.lr);
    o.actor_lr = cfg.get_real("agent", "actor_lr", o.actor_lr);
    check_network(name, cfg.get_string("agent", "network", "deterministic_policy_network"),
                  {"deterministic_policy_network"});
    config::warn_unknown_keys(cfg, "agent",
                              {"name", "network", "gamma", "tau", "noise_sigma",
                               "buffer_size", "batch_size", "start_train_step", "actor_lr"});
    return std::make_unique<DdpgAgent>(name, env_spec, o);
  }

  std::ostringstream msg;
  msg << "unknown agent '" << name << "'; registered agents:";
  for (const auto& n : agent_names()) msg << " " << n;
  throw LookupError(msg.str());
}

}  // namespace relab::agent
