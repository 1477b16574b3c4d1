#pragma once

#include <string>
#include <vector>

#include "relab/nn/matrix.hpp"
#include "relab/rng.hpp"

namespace relab::nn {

/// A trainable matrix together with its gradient accumulator.
struct Parameter {
  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.zero(); }

  Matrix value;
  Matrix grad;
};

enum class Activation { identity, relu, tanh };

Activation activation_from_name(const std::string& name);

/**
 * Affine layer y = x W + b with W [in x out], b [1 x out].
 *
 * forward() caches its input; backward(dy) accumulates into the parameter
 * gradients and returns dx. Calling backward without a preceding forward is a
 * state error. init() draws W uniformly from +-1/sqrt(in) and zeroes b.
 */
class Linear {
public:
  Linear(int in, int out);

  void init(Rng& rng);

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);

  int in_dim() const { return w_.value.rows(); }
  int out_dim() const { return w_.value.cols(); }

  Parameter& weight() { return w_; }
  Parameter& bias() { return b_; }
  std::vector<Parameter*> parameters() { return {&w_, &b_}; }

private:
  Parameter w_;
  Parameter b_;
  Matrix x_cache_;
  bool has_cache_ = false;
};

/**
 * Fully connected network: alternating Linear layers and activations.
 * The default body shape used across the framework is two hidden layers of 64
 * relu units with an identity output layer.
 */
class Mlp {
public:
  /// sizes = {in, h1, ..., out}; acts has one entry per layer (sizes.size()-1).
  Mlp(std::vector<int> sizes, std::vector<Activation> acts);

  /// Convenience: relu hidden layers, identity output.
  static Mlp make(int in, const std::vector<int>& hidden, int out,
                  Activation hidden_act = Activation::relu);

  void init(Rng& rng);

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);

  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }

  std::vector<Parameter*> parameters();

private:
  std::vector<Linear> layers_;
  std::vector<Activation> acts_;
  std::vector<Matrix> preact_cache_;
  bool has_cache_ = false;
};

/// Applies an activation elementwise.
Matrix activate(Activation act, const Matrix& z);

/// Chain-rule through an activation given the preactivation z: returns dz.
Matrix activate_backward(Activation act, const Matrix& z, const Matrix& dy);

/// Flat view over a parameter list, in declaration order.
std::vector<Matrix> export_values(const std::vector<Parameter*>& params);

/// Copies values back; shape mismatch raises CompatibilityError.
void import_values(const std::vector<Parameter*>& params, const std::vector<Matrix>& values);

}  // namespace relab::nn
