#include "relab/nn/layers.hpp"

#include <cmath>

#include "relab/error.hpp"

namespace relab::nn {

Activation activation_from_name(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw LookupError("unknown activation '" + name + "' (available: identity, relu, tanh)");
}

Matrix activate(Activation act, const Matrix& z) {
  Matrix y = z;
  double* p = y.data();
  const int n = y.size();
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (int i = 0; i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
      break;
    case Activation::tanh:
      for (int i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
      break;
  }
  return y;
}

Matrix activate_backward(Activation act, const Matrix& z, const Matrix& dy) {
  if (!z.same_shape(dy))
    throw DimensionError("activation backward: preactivation and gradient shapes differ");
  Matrix dz = dy;
  double* pd = dz.data();
  const double* pz = z.data();
  const int n = dz.size();
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (int i = 0; i < n; ++i)
        if (pz[i] <= 0.0) pd[i] = 0.0;
      break;
    case Activation::tanh:
      for (int i = 0; i < n; ++i) {
        const double t = std::tanh(pz[i]);
        pd[i] *= 1.0 - t * t;
      }
      break;
  }
  return dz;
}

Linear::Linear(int in, int out) : w_(Matrix(in, out)), b_(Matrix(1, out)) {
  if (in <= 0 || out <= 0) throw ParameterError("linear: dimensions must be positive");
}

void Linear::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
  double* pw = w_.value.data();
  for (int i = 0, n = w_.value.size(); i < n; ++i) pw[i] = rng.uniform(-bound, bound);
  b_.value.zero();
}

Matrix Linear::forward(const Matrix& x) {
  if (x.cols() != in_dim())
    throw DimensionError("linear forward: input has " + std::to_string(x.cols()) +
                         " columns, layer expects " + std::to_string(in_dim()));
  x_cache_ = x;
  has_cache_ = true;
  Matrix y = matmul(x, w_.value);
  add_row_inplace(y, b_.value);
  return y;
}

Matrix Linear::backward(const Matrix& dy) {
  if (!has_cache_) throw StateError("linear backward: no cached forward pass");
  if (dy.rows() != x_cache_.rows() || dy.cols() != out_dim())
    throw DimensionError("linear backward: gradient shape does not match last forward");
  add_inplace(w_.grad, matmul_tn(x_cache_, dy));
  add_inplace(b_.grad, sum_rows(dy));
  Matrix dx = matmul_nt(dy, w_.value);
  has_cache_ = false;
  return dx;
}

Mlp::Mlp(std::vector<int> sizes, std::vector<Activation> acts) : acts_(std::move(acts)) {
  if (sizes.size() < 2) throw ParameterError("mlp: need at least input and output sizes");
  if (acts_.size() != sizes.size() - 1)
    throw ParameterError("mlp: need one activation per layer");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    layers_.emplace_back(sizes[i], sizes[i + 1]);
  preact_cache_.resize(layers_.size());
}

Mlp Mlp::make(int in, const std::vector<int>& hidden, int out, Activation hidden_act) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  std::vector<Activation> acts(hidden.size(), hidden_act);
  acts.push_back(Activation::identity);
  return Mlp(std::move(sizes), std::move(acts));
}

void Mlp::init(Rng& rng) {
  for (auto& layer : layers_) layer.init(rng);
}

Matrix Mlp::forward(const Matrix& x) {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = layers_[i].forward(h);
    preact_cache_[i] = z;
    h = activate(acts_[i], z);
  }
  has_cache_ = true;
  return h;
}

Matrix Mlp::backward(const Matrix& dy) {
  if (!has_cache_) throw StateError("mlp backward: no cached forward pass");
  Matrix grad = dy;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    grad = activate_backward(acts_[i], preact_cache_[i], grad);
    grad = layers_[i].backward(grad);
  }
  has_cache_ = false;
  return grad;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_)
    for (auto* p : layer.parameters()) out.push_back(p);
  return out;
}

std::vector<Matrix> export_values(const std::vector<Parameter*>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

void import_values(const std::vector<Parameter*>& params, const std::vector<Matrix>& values) {
  if (params.size() != values.size())
    throw CompatibilityError("parameter import: expected " + std::to_string(params.size()) +
                             " blocks, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(values[i]))
      throw CompatibilityError("parameter import: block " + std::to_string(i) +
                               " shape mismatch");
    params[i]->value = values[i];
  }
}

}  // namespace relab::nn
