#pragma once

#include <string>
#include <vector>

#include "relab/nn/layers.hpp"

namespace relab::net {

/**
 * Everything a network factory needs to build a head. Agents fill in the
 * dimensions from the environment and their own hyperparameters; the hidden
 * layout defaults to two layers of 64 units.
 */
struct NetworkSpec {
  int in_dim = 0;
  int out_dim = 0;  ///< actions, actions*atoms, actions*quantiles, ... per head kind
  std::vector<int> hidden{64, 64};
  nn::Activation hidden_act = nn::Activation::relu;

  int n_actions = 0;
  int n_atoms = 1;      ///< per-action output entries for dueling/categorical heads
  double sigma_init = 0.5;  ///< noisy layer sigma scale, divided by sqrt(fan_in)

  std::vector<double> action_low;   ///< continuous actor bounds
  std::vector<double> action_high;
};

/// Fixed support {v_min + i*delta} of a categorical value distribution.
struct CategoricalSupport {
  CategoricalSupport(double v_min, double v_max, int n_atoms);

  double v_min;
  double v_max;
  int n_atoms;
  double delta;               ///< (v_max - v_min) / (n_atoms - 1)
  std::vector<double> atoms;  ///< strictly increasing, first v_min, last v_max
};

/// Quantile midpoints tau_i = (2i + 1) / (2n), i = 0..n-1.
std::vector<double> quantile_taus(int n_quantiles);

}  // namespace relab::net
