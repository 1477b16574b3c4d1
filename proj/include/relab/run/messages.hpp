#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "relab/buffer/transition.hpp"
#include "relab/nn/matrix.hpp"

namespace relab::run {

/**
 * One completed collection block from an actor. `actor_step` is the actor's
 * total transition count after this batch (strictly increasing per actor, so
 * the learner can prove it never consumes a block twice); `param_version` is
 * the version of the parameters that produced the transitions. An actor that
 * dies ships its diagnostic in `error` instead of transitions.
 */
struct TransitionBatchMsg {
  int actor_id = 0;
  std::vector<buffer::Transition> transitions;
  long actor_step = 0;
  long param_version = 0;
  std::string error;
};

/// Acting parameters broadcast by the learner; versions strictly increase.
/// `global_step` anchors actor-side schedules (exploration decay) without
/// the actors having to see each other's progress.
struct ParamUpdateMsg {
  long version = 0;
  long global_step = 0;
  std::vector<nn::Matrix> params;
};

/**
 * Latest-parameters slot for the manage loop: the learner publishes after
 * every update, the manager copies whenever it wants to evaluate. Readers
 * never block writers beyond the copy itself.
 */
class SnapshotSlot {
public:
  void publish(long version, long global_step, std::vector<nn::Matrix> params) {
    std::lock_guard lock(mu_);
    version_ = version;
    global_step_ = global_step;
    params_ = std::move(params);
  }

  struct Snapshot {
    long version = 0;
    long global_step = 0;
    std::vector<nn::Matrix> params;
  };

  Snapshot read() const {
    std::lock_guard lock(mu_);
    return {version_, global_step_, params_};
  }

private:
  mutable std::mutex mu_;
  long version_ = 0;
  long global_step_ = 0;
  std::vector<nn::Matrix> params_;
};

}  // namespace relab::run
