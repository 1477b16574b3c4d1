#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "relab/nn/layers.hpp"

namespace relab::nn {

/**
 * Gradient-descent optimizer over a fixed parameter list. step() applies one
 * update from the accumulated gradients and then zeroes them. State (if any)
 * is keyed by position in the parameter list, so per-parameter updates do not
 * depend on list order.
 */
class Optimizer {
public:
  explicit Optimizer(std::vector<Parameter*> params, double lr);
  virtual ~Optimizer() = default;

  virtual void step() = 0;
  void zero_grad();

  double learning_rate() const { return lr_; }
  const std::vector<Parameter*>& params() const { return params_; }

  /// Internal state as matrices + scalars for checkpointing. Base: none.
  virtual void export_state(std::vector<Matrix>& blocks, std::vector<double>& scalars) const;
  virtual void import_state(const std::vector<Matrix>& blocks,
                            const std::vector<double>& scalars);

protected:
  std::vector<Parameter*> params_;
  double lr_;
};

class Sgd : public Optimizer {
public:
  using Optimizer::Optimizer;
  void step() override;
};

/// Adam with bias correction; defaults beta1=0.9, beta2=0.999, eps=1e-8.
class Adam : public Optimizer {
public:
  Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step() override;

  std::int64_t t() const { return t_; }

  void export_state(std::vector<Matrix>& blocks, std::vector<double>& scalars) const override;
  void import_state(const std::vector<Matrix>& blocks,
                    const std::vector<double>& scalars) override;

private:
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

/// Names accepted by make_optimizer, sorted.
std::vector<std::string> optimizer_names();

/// Builds an optimizer by registry name ("adam", "sgd"); unknown name raises LookupError.
std::unique_ptr<Optimizer> make_optimizer(const std::string& name,
                                          std::vector<Parameter*> params, double lr);

/**
 * Scales all gradients so their global L2 norm is at most max_norm (> 0).
 * Returns the norm observed before clipping.
 */
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace relab::nn
