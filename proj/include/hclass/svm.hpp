#ifndef HCLASS_SVM_HPP_
#define HCLASS_SVM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hclass/matrix.hpp"

namespace hclass {

struct SvmHyper {
  double c = 1.0;
  double gamma = 1.0;
};

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);

// One binary soft-margin subproblem solved in the dual.
struct SmoResult {
  std::vector<double> alpha;
  double rho = 0.0;       // decision is sum(alpha_i y_i K(x_i, x)) - rho
  double objective = 0.0; // dual objective, maximization form
  std::size_t iterations = 0;
  bool converged = false;
};

// Sequential minimal optimization with second-order working-set selection and
// a maximal-violating-pair stopping rule: terminates when every pairwise KKT
// violation is at most tol. Deterministic given data order.
SmoResult smo_solve(const Matrix& x, const std::vector<int>& y, double c, double gamma,
                    double tol = 1e-3, std::size_t max_iter = 0);

struct BinaryMachine {
  int pos = 0;  // class index voted for when the decision value is positive
  int neg = 0;
  std::vector<std::uint32_t> sv;  // indices into SvmModel::vectors
  std::vector<double> coef;       // alpha_i * y_i
  double bias = 0.0;
};

// One-vs-one multiclass RBF SVM over preprocessed rows.
struct SvmModel {
  SvmHyper hyper;
  std::size_t n_classes = 0;
  Matrix vectors;  // union of support vectors
  std::vector<BinaryMachine> machines;

  // Vote counts per class for one row; sums to n_classes*(n_classes-1)/2.
  std::vector<double> votes(std::span<const double> row) const;
};

// y holds class indices 0..n_classes-1. Every pair trains on its two classes'
// rows in their original order. Throws SingleClass, NonFiniteInput.
SvmModel train_svm_ovo(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                       const SvmHyper& hyper, double tol = 1e-3);

}  // namespace hclass

#endif  // HCLASS_SVM_HPP_
