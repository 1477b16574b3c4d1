#include "relab/net/head.hpp"

#include <cmath>
#include <string>

#include "relab/error.hpp"

namespace relab::net {

namespace {

nn::Mlp make_body(const NetworkSpec& spec) {
  // body ends in an activated hidden layer; streams attach on top
  if (spec.hidden.empty()) throw ParameterError("network: need at least one hidden layer");
  std::vector<int> sizes{spec.in_dim};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  std::vector<nn::Activation> acts(spec.hidden.size(), spec.hidden_act);
  return nn::Mlp(std::move(sizes), std::move(acts));
}

}  // namespace

CategoricalSupport::CategoricalSupport(double v_min_, double v_max_, int n_atoms_)
    : v_min(v_min_), v_max(v_max_), n_atoms(n_atoms_) {
  if (n_atoms < 2) throw ParameterError("categorical support: need at least two atoms");
  if (!(v_min < v_max)) throw ParameterError("categorical support: v_min must be below v_max");
  delta = (v_max - v_min) / (n_atoms - 1);
  atoms.resize(n_atoms);
  for (int i = 0; i < n_atoms; ++i) atoms[i] = v_min + delta * i;
  atoms.back() = v_max;  // avoid accumulation drift on the last atom
}

std::vector<double> quantile_taus(int n_quantiles) {
  if (n_quantiles <= 0) throw ParameterError("quantile taus: count must be positive");
  std::vector<double> taus(n_quantiles);
  for (int i = 0; i < n_quantiles; ++i) taus[i] = (2.0 * i + 1.0) / (2.0 * n_quantiles);
  return taus;
}

MlpHead::MlpHead(const NetworkSpec& spec)
    : net_(nn::Mlp::make(spec.in_dim, spec.hidden, spec.out_dim, spec.hidden_act)) {}

nn::Matrix MlpHead::forward(const nn::Matrix& x, bool) { return net_.forward(x); }
nn::Matrix MlpHead::backward(const nn::Matrix& dout) { return net_.backward(dout); }

nn::Matrix dueling_combine(const nn::Matrix& value, const nn::Matrix& advantage,
                           int n_actions, int n_atoms) {
  if (value.cols() != n_atoms || advantage.cols() != n_actions * n_atoms ||
      value.rows() != advantage.rows())
    throw DimensionError("dueling combine: stream shapes do not match actions/atoms");
  const int batch = value.rows();
  nn::Matrix q(batch, n_actions * n_atoms);
  for (int b = 0; b < batch; ++b) {
    for (int z = 0; z < n_atoms; ++z) {
      double mean_adv = 0.0;
      for (int a = 0; a < n_actions; ++a) mean_adv += advantage(b, a * n_atoms + z);
      mean_adv /= n_actions;
      for (int a = 0; a < n_actions; ++a) {
        const int col = a * n_atoms + z;
        q(b, col) = value(b, z) + advantage(b, col) - mean_adv;
      }
    }
  }
  return q;
}

std::pair<nn::Matrix, nn::Matrix> dueling_split_grad(const nn::Matrix& dq, int n_actions,
                                                     int n_atoms) {
  if (dq.cols() != n_actions * n_atoms)
    throw DimensionError("dueling split: gradient width does not match actions/atoms");
  const int batch = dq.rows();
  nn::Matrix dv(batch, n_atoms);
  nn::Matrix da(batch, n_actions * n_atoms);
  for (int b = 0; b < batch; ++b) {
    for (int z = 0; z < n_atoms; ++z) {
      double sum = 0.0;
      for (int a = 0; a < n_actions; ++a) sum += dq(b, a * n_atoms + z);
      dv(b, z) = sum;
      const double mean = sum / n_actions;
      for (int a = 0; a < n_actions; ++a) {
        const int col = a * n_atoms + z;
        da(b, col) = dq(b, col) - mean;
      }
    }
  }
  return {std::move(dv), std::move(da)};
}

DuelingHead::DuelingHead(const NetworkSpec& spec)
    : body_(make_body(spec)),
      value_(spec.hidden.back(), spec.n_atoms),
      advantage_(spec.hidden.back(), spec.n_actions * spec.n_atoms),
      n_actions_(spec.n_actions),
      n_atoms_(spec.n_atoms) {
  if (spec.n_actions <= 0) throw ParameterError("dueling head: n_actions must be positive");
  if (spec.n_atoms <= 0) throw ParameterError("dueling head: n_atoms must be positive");
}

nn::Matrix DuelingHead::forward(const nn::Matrix& x, bool) {
  const nn::Matrix h = body_.forward(x);
  return dueling_combine(value_.forward(h), advantage_.forward(h), n_actions_, n_atoms_);
}

nn::Matrix DuelingHead::backward(const nn::Matrix& dout) {
  auto [dv, da] = dueling_split_grad(dout, n_actions_, n_atoms_);
  nn::Matrix dh = value_.backward(dv);
  nn::add_inplace(dh, advantage_.backward(da));
  return body_.backward(dh);
}

std::vector<nn::Parameter*> DuelingHead::parameters() {
  auto out = body_.parameters();
  for (auto* p : value_.parameters()) out.push_back(p);
  for (auto* p : advantage_.parameters()) out.push_back(p);
  return out;
}

void DuelingHead::init(Rng& rng) {
  body_.init(rng);
  value_.init(rng);
  advantage_.init(rng);
}

nn::Matrix categorical_probs(const nn::Matrix& logits, int n_actions, int n_atoms) {
  if (logits.cols() != n_actions * n_atoms)
    throw DimensionError("categorical probs: logit width does not match actions/atoms");
  nn::Matrix probs(logits.rows(), logits.cols());
  for (int b = 0; b < logits.rows(); ++b) {
    for (int a = 0; a < n_actions; ++a) {
      const int base = a * n_atoms;
      double max_logit = logits(b, base);
      for (int z = 1; z < n_atoms; ++z) max_logit = std::max(max_logit, logits(b, base + z));
      double sum = 0.0;
      for (int z = 0; z < n_atoms; ++z) {
        const double e = std::exp(logits(b, base + z) - max_logit);
        probs(b, base + z) = e;
        sum += e;
      }
      for (int z = 0; z < n_atoms; ++z) probs(b, base + z) /= sum;
    }
  }
  return probs;
}

PolicyValueHead::PolicyValueHead(const NetworkSpec& spec)
    : body_(make_body(spec)),
      policy_(spec.hidden.back(), spec.n_actions),
      value_(spec.hidden.back(), 1),
      n_actions_(spec.n_actions) {
  if (spec.n_actions <= 0)
    throw ParameterError("policy value head: n_actions must be positive");
}

nn::Matrix PolicyValueHead::forward(const nn::Matrix& x, bool) {
  const nn::Matrix h = body_.forward(x);
  const nn::Matrix logits = policy_.forward(h);
  const nn::Matrix value = value_.forward(h);
  nn::Matrix out(x.rows(), n_actions_ + 1);
  for (int b = 0; b < x.rows(); ++b) {
    for (int a = 0; a < n_actions_; ++a) out(b, a) = logits(b, a);
    out(b, n_actions_) = value(b, 0);
  }
  return out;
}

nn::Matrix PolicyValueHead::backward(const nn::Matrix& dout) {
  if (dout.cols() != n_actions_ + 1)
    throw DimensionError("policy value head: gradient width mismatch");
  nn::Matrix dlogits(dout.rows(), n_actions_);
  nn::Matrix dvalue(dout.rows(), 1);
  for (int b = 0; b < dout.rows(); ++b) {
    for (int a = 0; a < n_actions_; ++a) dlogits(b, a) = dout(b, a);
    dvalue(b, 0) = dout(b, n_actions_);
  }
  nn::Matrix dh = policy_.backward(dlogits);
  nn::add_inplace(dh, value_.backward(dvalue));
  return body_.backward(dh);
}

std::vector<nn::Parameter*> PolicyValueHead::parameters() {
  auto out = body_.parameters();
  for (auto* p : policy_.parameters()) out.push_back(p);
  for (auto* p : value_.parameters()) out.push_back(p);
  return out;
}

void PolicyValueHead::init(Rng& rng) {
  body_.init(rng);
  policy_.init(rng);
  value_.init(rng);
}

DeterministicActorHead::DeterministicActorHead(const NetworkSpec& spec)
    : net_(nn::Mlp::make(spec.in_dim, spec.hidden, spec.out_dim, spec.hidden_act)) {
  if (spec.action_low.size() != spec.action_high.size() ||
      static_cast<int>(spec.action_low.size()) != spec.out_dim)
    throw DimensionError("actor head: bounds do not match the action dimension");
  for (std::size_t d = 0; d < spec.action_low.size(); ++d) {
    if (!(spec.action_low[d] < spec.action_high[d]))
      throw ParameterError("actor head: action bounds must satisfy low < high");
    center_.push_back(0.5 * (spec.action_low[d] + spec.action_high[d]));
    half_range_.push_back(0.5 * (spec.action_high[d] - spec.action_low[d]));
  }
}

nn::Matrix DeterministicActorHead::forward(const nn::Matrix& x, bool) {
  preact_cache_ = net_.forward(x);
  nn::Matrix out = preact_cache_;
  for (int b = 0; b < out.rows(); ++b)
    for (int d = 0; d < out.cols(); ++d)
      out(b, d) = center_[d] + half_range_[d] * std::tanh(out(b, d));
  return out;
}

nn::Matrix DeterministicActorHead::backward(const nn::Matrix& dout) {
  if (!dout.same_shape(preact_cache_))
    throw DimensionError("actor head: gradient shape does not match last forward");
  nn::Matrix dz = dout;
  for (int b = 0; b < dz.rows(); ++b)
    for (int d = 0; d < dz.cols(); ++d) {
      const double t = std::tanh(preact_cache_(b, d));
      dz(b, d) *= half_range_[d] * (1.0 - t * t);
    }
  return net_.backward(dz);
}

}  // namespace relab::net
