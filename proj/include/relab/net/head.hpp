#pragma once

#include <memory>
#include <vector>

#include "relab/net/spec.hpp"
#include "relab/nn/layers.hpp"
#include "relab/nn/matrix.hpp"
#include "relab/rng.hpp"

namespace relab::net {

/**
 * A trainable network head: forward caches activations for one backward pass.
 * `training` switches noisy layers between sampled and mean weights; heads
 * without noise ignore it. clone() deep-copies parameters and structure (the
 * way target networks are created).
 */
class Head {
public:
  virtual ~Head() = default;

  virtual nn::Matrix forward(const nn::Matrix& x, bool training) = 0;
  virtual nn::Matrix backward(const nn::Matrix& dout) = 0;
  virtual std::vector<nn::Parameter*> parameters() = 0;
  virtual void init(Rng& rng) = 0;
  virtual std::unique_ptr<Head> clone() const = 0;

  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;

  /// Noisy heads redraw their weight noise here; others do nothing.
  virtual void resample_noise(Rng&) {}
  virtual bool noisy() const { return false; }
};

/// Plain fully connected head; also serves categorical/quantile outputs where
/// the agent interprets the flat output as [actions x entries] blocks.
class MlpHead : public Head {
public:
  explicit MlpHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override { return net_.parameters(); }
  void init(Rng& rng) override { net_.init(rng); }
  std::unique_ptr<Head> clone() const override { return std::make_unique<MlpHead>(*this); }
  int in_dim() const override { return net_.in_dim(); }
  int out_dim() const override { return net_.out_dim(); }

private:
  nn::Mlp net_;
};

/**
 * Dueling head: shared body, then a value stream (n_atoms outputs) and an
 * advantage stream (n_actions * n_atoms outputs), combined per atom as
 *   q[a,z] = v[z] + adv[a,z] - mean_a' adv[a',z].
 */
class DuelingHead : public Head {
public:
  explicit DuelingHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override;
  void init(Rng& rng) override;
  std::unique_ptr<Head> clone() const override { return std::make_unique<DuelingHead>(*this); }
  int in_dim() const override { return body_.in_dim(); }
  int out_dim() const override { return n_actions_ * n_atoms_; }

private:
  nn::Mlp body_;
  nn::Linear value_;
  nn::Linear advantage_;
  int n_actions_;
  int n_atoms_;
};

/// Policy + value in one head: output column layout [logits(0..A-1) | value].
class PolicyValueHead : public Head {
public:
  explicit PolicyValueHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override;
  void init(Rng& rng) override;
  std::unique_ptr<Head> clone() const override {
    return std::make_unique<PolicyValueHead>(*this);
  }
  int in_dim() const override { return body_.in_dim(); }
  int out_dim() const override { return n_actions_ + 1; }

  int n_actions() const { return n_actions_; }

private:
  nn::Mlp body_;
  nn::Linear policy_;
  nn::Linear value_;
  int n_actions_;
};

/// Deterministic continuous actor: mlp output squashed by tanh and rescaled
/// into [low, high] per dimension.
class DeterministicActorHead : public Head {
public:
  explicit DeterministicActorHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override { return net_.parameters(); }
  void init(Rng& rng) override { net_.init(rng); }
  std::unique_ptr<Head> clone() const override {
    return std::make_unique<DeterministicActorHead>(*this);
  }
  int in_dim() const override { return net_.in_dim(); }
  int out_dim() const override { return net_.out_dim(); }

private:
  nn::Mlp net_;
  nn::Matrix preact_cache_;
  std::vector<double> center_;
  std::vector<double> half_range_;
};

/// Combines value and advantage streams per atom; exposed for direct testing.
nn::Matrix dueling_combine(const nn::Matrix& value, const nn::Matrix& advantage,
                           int n_actions, int n_atoms);

/// Splits dQ into (dValue, dAdvantage) for the combination above.
std::pair<nn::Matrix, nn::Matrix> dueling_split_grad(const nn::Matrix& dq, int n_actions,
                                                     int n_atoms);

/// Per-action-block softmax over atoms: logits and result are [batch x actions*atoms].
nn::Matrix categorical_probs(const nn::Matrix& logits, int n_actions, int n_atoms);

}  // namespace relab::net
