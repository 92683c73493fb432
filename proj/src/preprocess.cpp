#include "hclass/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hclass/errors.hpp"

namespace hclass {

Preprocessor fit_preprocessor(const Matrix& x, double retained_variance) {
  if (x.rows < 2) throw_validation("TooFewRows", "need at least 2 rows to fit");
  if (retained_variance <= 0.0 || retained_variance > 1.0) {
    throw_validation("BadRetention", "retained variance must lie in (0, 1]");
  }
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;

  Preprocessor pre;
  pre.mean.assign(d, 0.0);
  pre.sd.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) pre.mean[c] += x(r, c);
  }
  for (double& m : pre.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = x(r, c) - pre.mean[c];
      pre.sd[c] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    pre.sd[c] = std::sqrt(pre.sd[c] / static_cast<double>(n - 1));
    if (pre.sd[c] <= 0.0 || !std::isfinite(pre.sd[c])) {
      pre.sd[c] = 1.0;
      pre.constant_features.push_back(c);
    }
  }

  Eigen::MatrixXd z(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) z(r, c) = (x(r, c) - pre.mean[c]) / pre.sd[c];
  }
  Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw_runtime("EigenFailure", "covariance eigendecomposition failed");
  }

  // Eigen returns ascending eigenvalues; reorder to descending and fix each
  // component's sign so its largest-magnitude entry is positive.
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = d - 1 - i;

  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) total += std::max(0.0, solver.eigenvalues()(i));
  std::size_t keep = d;
  if (retained_variance < 1.0 && total > 0.0) {
    double acc = 0.0;
    keep = 0;
    for (std::size_t i = 0; i < d; ++i) {
      acc += std::max(0.0, solver.eigenvalues()(order[i]));
      ++keep;
      if (acc / total >= retained_variance) break;
    }
  }

  pre.rotation = Matrix(d, keep);
  pre.eigenvalues.resize(keep);
  for (std::size_t j = 0; j < keep; ++j) {
    Eigen::VectorXd v = solver.eigenvectors().col(order[j]);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    for (std::size_t i = 0; i < d; ++i) pre.rotation(i, j) = v(i);
    pre.eigenvalues[j] = solver.eigenvalues()(order[j]);
  }
  return pre;
}

Matrix apply_preprocessor(const Preprocessor& pre, const Matrix& x) {
  if (x.cols != pre.in_dim()) {
    throw_validation("DimensionMismatch",
                     "preprocessor expects " + std::to_string(pre.in_dim()) +
                         " features, got " + std::to_string(x.cols));
  }
  Matrix out(x.rows, pre.out_dim());
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t j = 0; j < pre.out_dim(); ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) {
        acc += ((x(r, c) - pre.mean[c]) / pre.sd[c]) * pre.rotation(c, j);
      }
      out(r, j) = acc;
    }
  }
  return out;
}

}  // namespace hclass
