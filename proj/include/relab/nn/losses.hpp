#pragma once

#include <vector>

#include "relab/nn/matrix.hpp"

namespace relab::nn {

/// Scalar loss plus its gradient with respect to the prediction matrix.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

/**
 * Mean squared error. Per-row losses are summed over columns, weighted by
 * `weights` (all ones when null) and averaged over rows:
 *   L = (1/B) sum_i w_i sum_j (pred_ij - target_ij)^2
 */
LossResult mse_loss(const Matrix& pred, const Matrix& target,
                    const std::vector<double>* weights = nullptr);

/**
 * Huber loss with threshold kappa (> 0, errors otherwise):
 *   l(e) = 0.5 e^2          for |e| <= kappa
 *   l(e) = kappa (|e| - 0.5 kappa)   otherwise
 * Same weighting and reduction as mse_loss.
 */
LossResult huber_loss(const Matrix& pred, const Matrix& target, double kappa,
                      const std::vector<double>* weights = nullptr);

/// Per-element huber value and derivative, exposed for distributional losses.
double huber(double error, double kappa);
double huber_derivative(double error, double kappa);

}  // namespace relab::nn
