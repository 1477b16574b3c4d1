#include "relab/net/noisy.hpp"

#include <cmath>

#include "relab/error.hpp"

namespace relab::net {

namespace {

double signed_sqrt(double e) { return (e >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::abs(e)); }

}  // namespace

NoisyLinear::NoisyLinear(int in, int out, double sigma_init)
    : w_mu_(nn::Matrix(in, out)),
      w_sigma_(nn::Matrix(in, out)),
      b_mu_(nn::Matrix(1, out)),
      b_sigma_(nn::Matrix(1, out)),
      f_in_(in, 0.0),
      f_out_(out, 0.0),
      sigma_init_(sigma_init) {
  if (in <= 0 || out <= 0) throw ParameterError("noisy linear: dimensions must be positive");
  if (sigma_init < 0.0) throw ParameterError("noisy linear: sigma_init must be non-negative");
}

void NoisyLinear::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
  double* pw = w_mu_.value.data();
  for (int i = 0, n = w_mu_.value.size(); i < n; ++i) pw[i] = rng.uniform(-bound, bound);
  b_mu_.value.zero();
  w_sigma_.value.fill(sigma_init_ * bound);
  b_sigma_.value.fill(sigma_init_ * bound);
}

void NoisyLinear::resample(Rng& rng) {
  for (auto& f : f_in_) f = signed_sqrt(rng.normal());
  for (auto& f : f_out_) f = signed_sqrt(rng.normal());
}

nn::Matrix NoisyLinear::forward(const nn::Matrix& x, bool training) {
  if (x.cols() != in_dim())
    throw DimensionError("noisy linear forward: input width does not match layer");
  x_cache_ = x;
  has_cache_ = true;
  noise_used_ = training;

  const int in = in_dim(), out = out_dim();
  nn::Matrix y(x.rows(), out);
  for (int b = 0; b < x.rows(); ++b) {
    const double* xb = x.row(b);
    double* yb = y.row(b);
    for (int j = 0; j < out; ++j) {
      double acc = b_mu_.value(0, j);
      if (training) acc += b_sigma_.value(0, j) * f_out_[j];
      yb[j] = acc;
    }
    for (int i = 0; i < in; ++i) {
      const double xv = xb[i];
      const double* mu = w_mu_.value.row(i);
      const double* sg = w_sigma_.value.row(i);
      if (training) {
        const double fi = f_in_[i];
        for (int j = 0; j < out; ++j) yb[j] += xv * (mu[j] + sg[j] * fi * f_out_[j]);
      } else {
        for (int j = 0; j < out; ++j) yb[j] += xv * mu[j];
      }
    }
  }
  return y;
}

nn::Matrix NoisyLinear::backward(const nn::Matrix& dy) {
  if (!has_cache_) throw StateError("noisy linear backward: no cached forward pass");
  if (dy.rows() != x_cache_.rows() || dy.cols() != out_dim())
    throw DimensionError("noisy linear backward: gradient shape mismatch");

  const nn::Matrix dw = nn::matmul_tn(x_cache_, dy);
  const nn::Matrix db = nn::sum_rows(dy);
  nn::add_inplace(w_mu_.grad, dw);
  nn::add_inplace(b_mu_.grad, db);
  if (noise_used_) {
    for (int i = 0; i < in_dim(); ++i)
      for (int j = 0; j < out_dim(); ++j)
        w_sigma_.grad(i, j) += dw(i, j) * f_in_[i] * f_out_[j];
    for (int j = 0; j < out_dim(); ++j) b_sigma_.grad(0, j) += db(0, j) * f_out_[j];
  }

  // dx through the weights actually applied in the cached forward
  const int in = in_dim(), out = out_dim();
  nn::Matrix dx(dy.rows(), in);
  for (int b = 0; b < dy.rows(); ++b) {
    const double* dyb = dy.row(b);
    double* dxb = dx.row(b);
    for (int i = 0; i < in; ++i) {
      const double* mu = w_mu_.value.row(i);
      const double* sg = w_sigma_.value.row(i);
      double acc = 0.0;
      if (noise_used_) {
        const double fi = f_in_[i];
        for (int j = 0; j < out; ++j) acc += dyb[j] * (mu[j] + sg[j] * fi * f_out_[j]);
      } else {
        for (int j = 0; j < out; ++j) acc += dyb[j] * mu[j];
      }
      dxb[i] = acc;
    }
  }
  has_cache_ = false;
  return dx;
}

NoisyMlpHead::NoisyMlpHead(const NetworkSpec& spec)
    : input_(spec.in_dim, spec.hidden.empty() ? spec.out_dim : spec.hidden.front()),
      act_(spec.hidden_act),
      out_dim_(spec.out_dim) {
  if (spec.hidden.empty()) throw ParameterError("noisy head: need at least one hidden layer");
  for (std::size_t i = 0; i + 1 < spec.hidden.size(); ++i)
    noisy_.emplace_back(spec.hidden[i], spec.hidden[i + 1], spec.sigma_init);
  noisy_.emplace_back(spec.hidden.back(), spec.out_dim, spec.sigma_init);
  preacts_.resize(spec.hidden.size());
}

nn::Matrix NoisyMlpHead::forward(const nn::Matrix& x, bool training) {
  nn::Matrix z = input_.forward(x);
  preacts_[0] = z;
  nn::Matrix h = nn::activate(act_, z);
  for (std::size_t i = 0; i + 1 < noisy_.size(); ++i) {
    z = noisy_[i].forward(h, training);
    preacts_[i + 1] = z;
    h = nn::activate(act_, z);
  }
  has_cache_ = true;
  return noisy_.back().forward(h, training);
}

nn::Matrix NoisyMlpHead::backward(const nn::Matrix& dout) {
  if (!has_cache_) throw StateError("noisy head backward: no cached forward pass");
  nn::Matrix grad = noisy_.back().backward(dout);
  for (int i = static_cast<int>(noisy_.size()) - 2; i >= 0; --i) {
    grad = nn::activate_backward(act_, preacts_[i + 1], grad);
    grad = noisy_[i].backward(grad);
  }
  grad = nn::activate_backward(act_, preacts_[0], grad);
  has_cache_ = false;
  return input_.backward(grad);
}

std::vector<nn::Parameter*> NoisyMlpHead::parameters() {
  auto out = input_.parameters();
  for (auto& layer : noisy_)
    for (auto* p : layer.parameters()) out.push_back(p);
  return out;
}

void NoisyMlpHead::init(Rng& rng) {
  input_.init(rng);
  for (auto& layer : noisy_) layer.init(rng);
}

void NoisyMlpHead::resample_noise(Rng& rng) {
  for (auto& layer : noisy_) layer.resample(rng);
}

NoisyDuelingHead::NoisyDuelingHead(const NetworkSpec& spec)
    : input_(spec.in_dim, spec.hidden.empty() ? 1 : spec.hidden.front()),
      value_(spec.hidden.empty() ? 1 : spec.hidden.back(), spec.n_atoms, spec.sigma_init),
      advantage_(spec.hidden.empty() ? 1 : spec.hidden.back(),
                 spec.n_actions * spec.n_atoms, spec.sigma_init),
      act_(spec.hidden_act),
      n_actions_(spec.n_actions),
      n_atoms_(spec.n_atoms) {
  if (spec.hidden.empty())
    throw ParameterError("noisy dueling head: need at least one hidden layer");
  if (spec.n_actions <= 0 || spec.n_atoms <= 0)
    throw ParameterError("noisy dueling head: actions and atoms must be positive");
  for (std::size_t i = 0; i + 1 < spec.hidden.size(); ++i)
    hidden_.emplace_back(spec.hidden[i], spec.hidden[i + 1], spec.sigma_init);
  preacts_.resize(spec.hidden.size());
}

nn::Matrix NoisyDuelingHead::forward(const nn::Matrix& x, bool training) {
  nn::Matrix z = input_.forward(x);
  preacts_[0] = z;
  nn::Matrix h = nn::activate(act_, z);
  for (std::size_t i = 0; i < hidden_.size(); ++i) {
    z = hidden_[i].forward(h, training);
    preacts_[i + 1] = z;
    h = nn::activate(act_, z);
  }
  return dueling_combine(value_.forward(h, training), advantage_.forward(h, training),
                         n_actions_, n_atoms_);
}

nn::Matrix NoisyDuelingHead::backward(const nn::Matrix& dout) {
  auto [dv, da] = dueling_split_grad(dout, n_actions_, n_atoms_);
  nn::Matrix dh = value_.backward(dv);
  nn::add_inplace(dh, advantage_.backward(da));
  for (int i = static_cast<int>(hidden_.size()) - 1; i >= 0; --i) {
    dh = nn::activate_backward(act_, preacts_[i + 1], dh);
    dh = hidden_[i].backward(dh);
  }
  dh = nn::activate_backward(act_, preacts_[0], dh);
  return input_.backward(dh);
}

std::vector<nn::Parameter*> NoisyDuelingHead::parameters() {
  auto out = input_.parameters();
  for (auto& layer : hidden_)
    for (auto* p : layer.parameters()) out.push_back(p);
  for (auto* p : value_.parameters()) out.push_back(p);
  for (auto* p : advantage_.parameters()) out.push_back(p);
  return out;
}

void NoisyDuelingHead::init(Rng& rng) {
  input_.init(rng);
  for (auto& layer : hidden_) layer.init(rng);
  value_.init(rng);
  advantage_.init(rng);
}

void NoisyDuelingHead::resample_noise(Rng& rng) {
  for (auto& layer : hidden_) layer.resample(rng);
  value_.resample(rng);
  advantage_.resample(rng);
}

}  // namespace relab::net
