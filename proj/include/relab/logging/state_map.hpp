#pragma once

#include <map>
#include <string>
#include <vector>

#include "relab/nn/matrix.hpp"
#include "relab/rng.hpp"

namespace relab::logging {

/**
 * Serializable agent state: named sections of matrices (parameters, optimizer
 * moments), named scalars (counters) and named RNG states. Checkpoint files
 * are a binary encoding of this structure; keys are written in sorted order
 * so identical state produces identical bytes.
 */
struct StateMap {
  std::map<std::string, std::vector<nn::Matrix>> sections;
  std::map<std::string, double> scalars;
  std::map<std::string, Rng::State> rngs;
};

}  // namespace relab::logging
