#ifndef HCLASS_TESTS_QP_ORACLE_HPP_
#define HCLASS_TESTS_QP_ORACLE_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "hclass/matrix.hpp"
#include "hclass/svm.hpp"

namespace hclass::testing {

// Exhaustive solver for the binary SVM dual
//   max  sum(a) - 1/2 a' Q a   s.t.  y'a = 0,  0 <= a_i <= C
// by enumerating every active-set assignment (each a_i at 0, at C, or free)
// and solving the stationarity system for the free block. The objective is
// concave, so the best feasible stationary candidate is the global optimum.
// Only viable for ~12 points (3^n assignments).
inline double qp_oracle_objective(const hclass::Matrix& x, const std::vector<int>& y,
                                  double c, double gamma) {
  const int n = static_cast<int>(x.rows);
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      q(i, j) = y[i] * y[j] * hclass::rbf_kernel(x.row(i), x.row(j), gamma);
    }
  }

  const double feas_tol = 1e-7;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);  // 0 = at lower bound, 1 = at C, 2 = free

  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= 3;

  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (int i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    std::vector<int> free_idx;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) alpha(i) = c;
      if (state[i] == 2) free_idx.push_back(i);
    }

    const int f = static_cast<int>(free_idx.size());
    if (f == 0) {
      double ya = 0.0;
      for (int i = 0; i < n; ++i) ya += y[i] * alpha(i);
      if (std::abs(ya) > feas_tol) continue;
    } else {
      // [ Q_FF  y_F ] [a_F]   [ 1 - Q_FB a_B ]
      // [ y_F'   0  ] [ l ] = [ -y_B' a_B    ]
      Eigen::MatrixXd sys(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      for (int a = 0; a < f; ++a) {
        for (int b = 0; b < f; ++b) sys(a, b) = q(free_idx[a], free_idx[b]);
        sys(a, f) = y[free_idx[a]];
        sys(f, a) = y[free_idx[a]];
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
          if (state[i] == 1) dot += q(free_idx[a], i) * c;
        }
        rhs(a) = 1.0 - dot;
      }
      sys(f, f) = 0.0;
      double yb = 0.0;
      for (int i = 0; i < n; ++i) {
        if (state[i] == 1) yb += y[i] * c;
      }
      rhs(f) = -yb;

      Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
      if (!((sys * sol - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()))) continue;
      bool ok = true;
      for (int a = 0; a < f; ++a) {
        const double v = sol(a);
        if (v < -feas_tol || v > c + feas_tol) {
          ok = false;
          break;
        }
        alpha(free_idx[a]) = std::min(std::max(v, 0.0), c);
      }
      if (!ok) continue;
      double ya = 0.0;
      for (int i = 0; i < n; ++i) ya += y[i] * alpha(i);
      if (std::abs(ya) > 1e-6) continue;
    }

    const double obj = alpha.sum() - 0.5 * alpha.dot(q * alpha);
    if (obj > best) best = obj;
  }
  return best;
}

// Largest KKT violation of a solved binary problem, measured against the
// decision values implied by (alpha, rho).
inline double kkt_max_violation(const hclass::Matrix& x, const std::vector<int>& y,
                                const std::vector<double>& alpha, double rho, double c,
                                double gamma) {
  const std::size_t n = x.rows;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = -rho;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] > 0.0) f += alpha[j] * y[j] * hclass::rbf_kernel(x.row(j), x.row(i), gamma);
    }
    const double margin = y[i] * f;
    double violation = 0.0;
    if (alpha[i] <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha[i] >= c) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace hclass::testing

#endif  // HCLASS_TESTS_QP_ORACLE_HPP_
