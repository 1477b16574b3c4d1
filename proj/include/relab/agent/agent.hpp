#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "relab/buffer/transition.hpp"
#include "relab/logging/state_map.hpp"
#include "relab/nn/layers.hpp"
#include "relab/rng.hpp"

namespace relab::agent {

/// Chosen action plus the behaviour-policy statistics on-policy learners need.
struct ActInfo {
  buffer::Action action;
  double logprob = 0.0;
  double value = 0.0;
};

/// Outcome of a learn attempt. `learned` is false when the agent is not ready
/// (warmup, buffer too small, rollout not full).
struct LearnStats {
  bool learned = false;
  double loss = 0.0;
  std::map<std::string, double> aux;
};

/**
 * An agent ties networks, buffers and an optimizer together. The runtime uses
 * two call patterns:
 *   single process:  act -> process(transition, step)          per env step
 *   distributed:     actors act/store remotely; the learner calls store() for
 *                    every received transition and learn() per round/window.
 * process() is exactly store() + learn(), so both paths share the cadence
 * rules (start_train_step, rollout horizon, episode end) in one place.
 *
 * Randomness is split into an acting stream and a learning stream so that a
 * learner's sampling never disturbs an actor's exploration sequence.
 */
class Agent {
public:
  explicit Agent(std::string name) : name_(std::move(name)) {}
  virtual ~Agent() = default;

  const std::string& name() const { return name_; }

  virtual ActInfo act(const std::vector<double>& state, long step, bool training) = 0;
  virtual void store(const buffer::Transition& t) = 0;
  virtual LearnStats learn(long step) = 0;

  LearnStats process(const buffer::Transition& t, long step) {
    store(t);
    return learn(step);
  }

  /// Parameters that define acting behaviour (online networks, in a fixed order).
  virtual std::vector<nn::Parameter*> parameters() = 0;

  std::vector<nn::Matrix> export_params() { return nn::export_values(parameters()); }
  void import_params(const std::vector<nn::Matrix>& blocks) {
    nn::import_values(parameters(), blocks);
  }

  /// Full training state for checkpoints (parameters, targets, optimizer, rng).
  virtual void export_state(logging::StateMap& out) = 0;
  virtual void import_state(const logging::StateMap& in) = 0;

  /// Derives the acting/learning streams from the run seed and an actor id.
  virtual void seed_streams(std::uint64_t base_seed, int actor_id) {
    act_rng_ = Rng(Rng::derive(base_seed, stream::kAct, static_cast<std::uint64_t>(actor_id)));
    learn_rng_ = Rng(Rng::derive(base_seed, stream::kLearn, 0));
  }

protected:
  void export_rngs(logging::StateMap& out) const {
    out.rngs["act"] = act_rng_.state();
    out.rngs["learn"] = learn_rng_.state();
  }
  void import_rngs(const logging::StateMap& in) {
    if (auto it = in.rngs.find("act"); it != in.rngs.end()) act_rng_.set_state(it->second);
    if (auto it = in.rngs.find("learn"); it != in.rngs.end())
      learn_rng_.set_state(it->second);
  }

  std::string name_;
  Rng act_rng_{1};
  Rng learn_rng_{2};
};

}  // namespace relab::agent
