#include "relab/nn/losses.hpp"

#include <cmath>
#include <string>

#include "relab/error.hpp"

namespace relab::nn {

namespace {

void check_pair(const Matrix& pred, const Matrix& target, const std::vector<double>* weights,
                const char* op) {
  if (!pred.same_shape(target))
    throw DimensionError(std::string(op) + ": prediction and target shapes differ");
  if (pred.rows() == 0) throw ParameterError(std::string(op) + ": empty batch");
  if (weights && static_cast<int>(weights->size()) != pred.rows())
    throw DimensionError(std::string(op) + ": need one weight per row");
}

}  // namespace

double huber(double error, double kappa) {
  const double abs_e = std::abs(error);
  if (abs_e <= kappa) return 0.5 * error * error;
  return kappa * (abs_e - 0.5 * kappa);
}

double huber_derivative(double error, double kappa) {
  if (std::abs(error) <= kappa) return error;
  return error > 0.0 ? kappa : -kappa;
}

LossResult mse_loss(const Matrix& pred, const Matrix& target,
                    const std::vector<double>* weights) {
  check_pair(pred, target, weights, "mse");
  const int rows = pred.rows(), cols = pred.cols();
  const double inv_b = 1.0 / rows;
  LossResult out;
  out.grad = Matrix(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    for (int j = 0; j < cols; ++j) {
      const double e = pred(i, j) - target(i, j);
      out.value += w * e * e * inv_b;
      out.grad(i, j) = 2.0 * w * e * inv_b;
    }
  }
  return out;
}

LossResult huber_loss(const Matrix& pred, const Matrix& target, double kappa,
                      const std::vector<double>* weights) {
  if (kappa <= 0.0) throw ParameterError("huber: kappa must be positive");
  check_pair(pred, target, weights, "huber");
  const int rows = pred.rows(), cols = pred.cols();
  const double inv_b = 1.0 / rows;
  LossResult out;
  out.grad = Matrix(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    for (int j = 0; j < cols; ++j) {
      const double e = pred(i, j) - target(i, j);
      out.value += w * huber(e, kappa) * inv_b;
      out.grad(i, j) = w * huber_derivative(e, kappa) * inv_b;
    }
  }
  return out;
}

}  // namespace relab::nn
