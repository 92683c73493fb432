#ifndef HCLASS_PREPROCESS_HPP_
#define HCLASS_PREPROCESS_HPP_

#include <vector>

#include "hclass/matrix.hpp"

namespace hclass {

// Standardization followed by a principal component rotation, both fit on
// training rows only. Constant features get sd 1 so they standardize to zero.
struct Preprocessor {
  std::vector<double> mean;
  std::vector<double> sd;
  Matrix rotation;                 // in_dim x out_dim, orthonormal columns
  std::vector<double> eigenvalues; // variance per retained component, descending
  std::vector<std::size_t> constant_features;

  std::size_t in_dim() const { return mean.size(); }
  std::size_t out_dim() const { return rotation.cols; }
};

// retained_variance in (0, 1]; 1 keeps every component (a pure rotation).
// Throws TooFewRows when given fewer than two rows.
Preprocessor fit_preprocessor(const Matrix& x, double retained_variance = 1.0);

// Applies standardization and rotation. Throws DimensionMismatch.
Matrix apply_preprocessor(const Preprocessor& pre, const Matrix& x);

}  // namespace hclass

#endif  // HCLASS_PREPROCESS_HPP_
