#include "relab/net/registry.hpp"

#include <functional>
#include <map>

#include "relab/error.hpp"
#include "relab/net/noisy.hpp"

namespace relab::net {

namespace {

using Factory = std::function<std::unique_ptr<Head>(const NetworkSpec&)>;

NetworkSpec scalar_q(NetworkSpec spec) {
  // scalar value heads always carry one entry per action
  spec.n_atoms = 1;
  spec.out_dim = spec.n_actions;
  return spec;
}

const std::map<std::string, Factory>& registry() {
  static const std::map<std::string, Factory> table = {
      {"discrete_q_network",
       [](const NetworkSpec& s) { return std::make_unique<MlpHead>(scalar_q(s)); }},
      {"dueling_q_network",
       [](const NetworkSpec& s) { return std::make_unique<DuelingHead>(scalar_q(s)); }},
      {"noisy_q_network",
       [](const NetworkSpec& s) { return std::make_unique<NoisyMlpHead>(scalar_q(s)); }},
      {"noisy_dueling_q_network",
       [](const NetworkSpec& s) { return std::make_unique<NoisyDuelingHead>(scalar_q(s)); }},
      {"categorical_q_network",
       [](const NetworkSpec& s) {
         NetworkSpec spec = s;
         spec.out_dim = spec.n_actions * spec.n_atoms;
         return std::make_unique<MlpHead>(spec);
       }},
      {"noisy_dueling_categorical_q_network",
       [](const NetworkSpec& s) {
         NetworkSpec spec = s;
         spec.out_dim = spec.n_actions * spec.n_atoms;
         // one atom degenerates to the scalar noisy dueling network
         return std::make_unique<NoisyDuelingHead>(spec);
       }},
      {"quantile_q_network",
       [](const NetworkSpec& s) {
         NetworkSpec spec = s;
         spec.out_dim = spec.n_actions * spec.n_atoms;
         return std::make_unique<MlpHead>(spec);
       }},
      {"discrete_policy_network",
       [](const NetworkSpec& s) { return std::make_unique<MlpHead>(scalar_q(s)); }},
      {"discrete_policy_value_network",
       [](const NetworkSpec& s) { return std::make_unique<PolicyValueHead>(s); }},
      {"deterministic_policy_network",
       [](const NetworkSpec& s) { return std::make_unique<DeterministicActorHead>(s); }},
      {"state_action_q_network",
       [](const NetworkSpec& s) {
         NetworkSpec spec = s;
         spec.out_dim = 1;
         return std::make_unique<MlpHead>(spec);
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> network_names() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

std::unique_ptr<Head> build_network(const std::string& name, const NetworkSpec& spec) {
  const auto& table = registry();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string msg = "unknown network '" + name + "' (available:";
    for (const auto& n : network_names()) msg += " " + n;
    throw LookupError(msg + ")");
  }
  return it->second(spec);
}

}  // namespace relab::net
