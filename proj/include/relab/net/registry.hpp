#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relab/net/head.hpp"

namespace relab::net {

/// Registered head names, sorted.
std::vector<std::string> network_names();

/// Builds a head by name; unknown names raise LookupError listing what exists.
std::unique_ptr<Head> build_network(const std::string& name, const NetworkSpec& spec);

}  // namespace relab::net
