#include "hclass/softmax.hpp"

#include <algorithm>
#include <cmath>

#include "hclass/errors.hpp"

namespace hclass {

std::vector<double> SoftmaxModel::logits(std::span<const double> row) const {
  if (row.size() + 1 != weights.cols) {
    throw_validation("DimensionMismatch", "feature row does not match model width");
  }
  std::vector<double> out(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    double z = weights(k, weights.cols - 1);  // bias
    for (std::size_t d = 0; d < row.size(); ++d) z += weights(k, d) * row[d];
    out[k] = z;
  }
  return out;
}

std::vector<double> SoftmaxModel::to_probabilities(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

double softmax_loss_grad(const Matrix& weights, const Matrix& x,
                         const std::vector<int>& y, double l2, Matrix& grad) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const std::size_t k_classes = weights.rows;
  grad = Matrix(weights.rows, weights.cols, 0.0);

  double loss = 0.0;
  std::vector<double> z(k_classes);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (std::size_t k = 0; k < k_classes; ++k) {
      double acc = weights(k, d);
      for (std::size_t c = 0; c < d; ++c) acc += weights(k, c) * row[c];
      z[k] = acc;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - m);
      sum += v;
    }
    loss -= std::log(z[y[r]] / sum);
    for (std::size_t k = 0; k < k_classes; ++k) {
      const double p = z[k] / sum;
      const double delta = p - (static_cast<int>(k) == y[r] ? 1.0 : 0.0);
      for (std::size_t c = 0; c < d; ++c) grad(k, c) += delta * row[c];
      grad(k, d) += delta;
    }
  }
  loss /= static_cast<double>(n);
  for (double& g : grad.data) g /= static_cast<double>(n);

  // L2 on everything but the bias column.
  for (std::size_t k = 0; k < k_classes; ++k) {
    for (std::size_t c = 0; c < d; ++c) {
      loss += 0.5 * l2 * weights(k, c) * weights(k, c);
      grad(k, c) += l2 * weights(k, c);
    }
  }
  return loss;
}

SoftmaxModel train_softmax(const Matrix& x, const std::vector<int>& y,
                           std::size_t n_classes, const SoftmaxHyper& hyper) {
  if (x.rows != y.size()) {
    throw_validation("DimensionMismatch", "label count must match row count");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) throw_validation("NonFiniteInput", "non-finite feature value");
  }
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw_validation("BadLabel", "class index out of range");
    }
  }
  if (hyper.epochs < 0) throw_validation("BadHyper", "epochs must be non-negative");

  SoftmaxModel model;
  model.n_classes = n_classes;
  model.weights = Matrix(n_classes, x.cols + 1, 0.0);
  Matrix grad;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    softmax_loss_grad(model.weights, x, y, hyper.l2, grad);
    for (std::size_t i = 0; i < model.weights.data.size(); ++i) {
      model.weights.data[i] -= hyper.learning_rate * grad.data[i];
    }
  }
  return model;
}

}  // namespace hclass
