#ifndef HCLASS_TESTS_JACOBI_HPP_
#define HCLASS_TESTS_JACOBI_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "hclass/matrix.hpp"

namespace hclass::testing {

// Plain cyclic Jacobi eigenvalue sweep for small symmetric matrices; the
// hand-rolled cross-check for the library's PCA decomposition.
inline std::vector<double> jacobi_eigenvalues(hclass::Matrix a, int sweeps = 64) {
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-18) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cos_r = 1.0 / std::sqrt(t * t + 1.0);
        const double sin_r = t * cos_r;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = cos_r * akp - sin_r * akq;
          a(k, q) = sin_r * akp + cos_r * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = cos_r * apk - sin_r * aqk;
          a(q, k) = sin_r * apk + cos_r * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

}  // namespace hclass::testing

#endif  // HCLASS_TESTS_JACOBI_HPP_
