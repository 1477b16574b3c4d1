#pragma once

#include <vector>

#include "relab/net/head.hpp"

namespace relab::net {

/**
 * Linear layer with factorized Gaussian parameter noise:
 *   w_ij = mu_ij + sigma_ij * f(eps_in_i) * f(eps_out_j),  f(e) = sign(e) sqrt(|e|)
 *   b_j  = bmu_j + bsigma_j * f(eps_out_j)
 * resample() redraws eps; a training forward uses the sampled weights, an
 * evaluation forward uses the means exactly. sigma is initialized to the
 * constant sigma_init / sqrt(fan_in).
 */
class NoisyLinear {
public:
  NoisyLinear(int in, int out, double sigma_init);

  void init(Rng& rng);
  void resample(Rng& rng);

  nn::Matrix forward(const nn::Matrix& x, bool training);
  nn::Matrix backward(const nn::Matrix& dy);

  int in_dim() const { return w_mu_.value.rows(); }
  int out_dim() const { return w_mu_.value.cols(); }
  std::vector<nn::Parameter*> parameters() { return {&w_mu_, &w_sigma_, &b_mu_, &b_sigma_}; }

  const std::vector<double>& f_in() const { return f_in_; }
  const std::vector<double>& f_out() const { return f_out_; }

private:
  nn::Parameter w_mu_, w_sigma_, b_mu_, b_sigma_;
  std::vector<double> f_in_, f_out_;  ///< f(eps), cached at resample
  nn::Matrix x_cache_;
  bool has_cache_ = false;
  bool noise_used_ = false;  ///< whether the cached forward used sampled weights
  double sigma_init_;
};

/// Q head with a deterministic input layer and noisy deeper layers.
class NoisyMlpHead : public Head {
public:
  explicit NoisyMlpHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override;
  void init(Rng& rng) override;
  std::unique_ptr<Head> clone() const override {
    return std::make_unique<NoisyMlpHead>(*this);
  }
  int in_dim() const override { return input_.in_dim(); }
  int out_dim() const override { return out_dim_; }
  void resample_noise(Rng& rng) override;
  bool noisy() const override { return true; }

private:
  nn::Linear input_;
  std::vector<NoisyLinear> noisy_;  ///< hidden-to-hidden chain plus output layer
  std::vector<nn::Matrix> preacts_;
  nn::Activation act_;
  int out_dim_;
  bool has_cache_ = false;
};

/// Noisy dueling head over n_atoms entries per action; with n_atoms == 1 this
/// is the scalar noisy dueling Q network.
class NoisyDuelingHead : public Head {
public:
  explicit NoisyDuelingHead(const NetworkSpec& spec);

  nn::Matrix forward(const nn::Matrix& x, bool training) override;
  nn::Matrix backward(const nn::Matrix& dout) override;
  std::vector<nn::Parameter*> parameters() override;
  void init(Rng& rng) override;
  std::unique_ptr<Head> clone() const override {
    return std::make_unique<NoisyDuelingHead>(*this);
  }
  int in_dim() const override { return input_.in_dim(); }
  int out_dim() const override { return n_actions_ * n_atoms_; }
  void resample_noise(Rng& rng) override;
  bool noisy() const override { return true; }

private:
  nn::Linear input_;
  std::vector<NoisyLinear> hidden_;
  NoisyLinear value_;
  NoisyLinear advantage_;
  std::vector<nn::Matrix> preacts_;
  nn::Activation act_;
  int n_actions_;
  int n_atoms_;
};

}  // namespace relab::net
