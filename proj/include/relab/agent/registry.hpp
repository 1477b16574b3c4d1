#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relab/agent/agent.hpp"
#include "relab/config/config.hpp"
#include "relab/env/env.hpp"

namespace relab::agent {

/// Registered agent names, in the order the CLI lists them.
const std::vector<std::string>& agent_names();

/**
 * Builds the agent named in cfg's agent table, bound to the given
 * environment shape. Raises LookupError for unknown names, ConfigError for
 * incompatible combinations (wrong action space, network that does not fit
 * the agent's loss), and warns once about agent-table keys nothing consumes.
 */
std::unique_ptr<Agent> build_agent(const config::ConfigTree& cfg,
                                   const env::EnvSpec& env_spec);

}  // namespace relab::agent
