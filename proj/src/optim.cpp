#include "relab/nn/optim.hpp"

#include <cmath>

#include "relab/error.hpp"

namespace relab::nn {

Optimizer::Optimizer(std::vector<Parameter*> params, double lr)
    : params_(std::move(params)), lr_(lr) {
  if (lr <= 0.0) throw ParameterError("optimizer: learning rate must be positive");
  if (params_.empty()) throw ParameterError("optimizer: empty parameter list");
}

void Optimizer::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Optimizer::export_state(std::vector<Matrix>&, std::vector<double>&) const {}
void Optimizer::import_state(const std::vector<Matrix>& blocks,
                             const std::vector<double>& scalars) {
  if (!blocks.empty() || !scalars.empty())
    throw CompatibilityError("optimizer import: unexpected state for stateless optimizer");
}

void Sgd::step() {
  for (auto* p : params_) {
    axpy_inplace(p->value, -lr_, p->grad);
    p->zero_grad();
  }
}

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1, double beta2, double eps)
    : Optimizer(std::move(params), lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto* p : params_) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter* p = params_[k];
    double* pm = m_[k].data();
    double* pv = v_[k].data();
    double* pw = p->value.data();
    const double* pg = p->grad.data();
    for (int i = 0, n = p->value.size(); i < n; ++i) {
      const double g = pg[i];
      pm[i] = beta1_ * pm[i] + (1.0 - beta1_) * g;
      pv[i] = beta2_ * pv[i] + (1.0 - beta2_) * g * g;
      const double m_hat = pm[i] / bc1;
      const double v_hat = pv[i] / bc2;
      pw[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
    p->zero_grad();
  }
}

void Adam::export_state(std::vector<Matrix>& blocks, std::vector<double>& scalars) const {
  for (const auto& m : m_) blocks.push_back(m);
  for (const auto& v : v_) blocks.push_back(v);
  scalars.push_back(static_cast<double>(t_));
}

void Adam::import_state(const std::vector<Matrix>& blocks, const std::vector<double>& scalars) {
  if (blocks.size() != 2 * params_.size() || scalars.size() != 1)
    throw CompatibilityError("adam import: state layout mismatch");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!m_[k].same_shape(blocks[k]) || !v_[k].same_shape(blocks[params_.size() + k]))
      throw CompatibilityError("adam import: moment shape mismatch");
    m_[k] = blocks[k];
    v_[k] = blocks[params_.size() + k];
  }
  t_ = static_cast<std::int64_t>(scalars[0]);
}

std::vector<std::string> optimizer_names() { return {"adam", "sgd"}; }

std::unique_ptr<Optimizer> make_optimizer(const std::string& name,
                                          std::vector<Parameter*> params, double lr) {
  if (name == "adam") return std::make_unique<Adam>(std::move(params), lr);
  if (name == "sgd") return std::make_unique<Sgd>(std::move(params), lr);
  std::string msg = "unknown optimizer '" + name + "' (available:";
  for (const auto& n : optimizer_names()) msg += " " + n;
  throw LookupError(msg + ")");
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  if (max_norm <= 0.0) throw ParameterError("clip_grad_norm: max_norm must be positive");
  double total = 0.0;
  for (const auto* p : params) {
    const double* g = p->grad.data();
    for (int i = 0, n = p->grad.size(); i < n; ++i) total += g[i] * g[i];
  }
  const double norm = std::sqrt(total);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto* p : params) scale_inplace(p->grad, scale);
  }
  return norm;
}

}  // namespace relab::nn
