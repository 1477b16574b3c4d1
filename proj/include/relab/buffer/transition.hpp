#pragma once

#include <vector>

namespace relab::buffer {

/// Discrete index or continuous vector, depending on the environment.
struct Action {
  enum class Kind { discrete, continuous };

  static Action make_discrete(int index) {
    Action a;
    a.kind = Kind::discrete;
    a.index = index;
    return a;
  }

  static Action make_continuous(std::vector<double> values) {
    Action a;
    a.kind = Kind::continuous;
    a.values = std::move(values);
    return a;
  }

  Kind kind = Kind::discrete;
  int index = 0;
  std::vector<double> values;
};

/**
 * One environment interaction. `done` marks true termination only; hitting a
 * step limit sets `truncated` instead so bootstrapped targets still use the
 * next state's value. `n_steps` is the span covered by an aggregated
 * multistep transition (gamma is raised to this power in TD targets).
 * `logprob` and `value` carry behaviour-policy statistics for on-policy
 * agents; value-based agents leave them at zero.
 */
struct Transition {
  std::vector<double> state;
  Action action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
  bool truncated = false;
  int n_steps = 1;
  double logprob = 0.0;
  double value = 0.0;
  int actor_id = 0;
};

}  // namespace relab::buffer
