#ifndef HCLASS_SOFTMAX_HPP_
#define HCLASS_SOFTMAX_HPP_

#include <vector>

#include "hclass/matrix.hpp"

namespace hclass {

struct SoftmaxHyper {
  double learning_rate = 0.5;
  int epochs = 300;
  double l2 = 1e-4;
};

// Multinomial logistic regression trained by full-batch gradient descent from
// zero weights, so training is deterministic. Scores are raw logits; the
// bias is the last weight column and is excluded from the L2 penalty.
struct SoftmaxModel {
  std::size_t n_classes = 0;
  Matrix weights;  // n_classes x (dim + 1)

  std::vector<double> logits(std::span<const double> row) const;
  static std::vector<double> to_probabilities(std::span<const double> logits);
};

// Mean cross-entropy loss plus L2 penalty, and its gradient in `grad`
// (same shape as weights). Exposed so the gradient can be checked against
// finite differences.
double softmax_loss_grad(const Matrix& weights, const Matrix& x,
                         const std::vector<int>& y, double l2, Matrix& grad);

SoftmaxModel train_softmax(const Matrix& x, const std::vector<int>& y,
                           std::size_t n_classes, const SoftmaxHyper& hyper);

}  // namespace hclass

#endif  // HCLASS_SOFTMAX_HPP_
