#include "hclass/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "hclass/errors.hpp"

namespace hclass {

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  double dist = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    dist += d * d;
  }
  return std::exp(-gamma * dist);
}

namespace {

constexpr double kTau = 1e-12;

// Rows of the kernel matrix, fully materialized for small problems and kept
// in a bounded LRU for large ones.
class KernelCache {
 public:
  KernelCache(const Matrix& x, double gamma, std::size_t full_limit = 4096)
      : x_(x), gamma_(gamma), n_(x.rows) {
    norms_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (double v : x.row(i)) s += v * v;
      norms_[i] = s;
    }
    if (n_ <= full_limit) {
      full_ = Matrix(n_, n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i; j < n_; ++j) {
          const double k = kernel(i, j);
          full_(i, j) = k;
          full_(j, i) = k;
        }
      }
    } else {
      max_cached_ = std::max<std::size_t>(64, (256ull << 20) / (n_ * sizeof(double)));
    }
  }

  double diag(std::size_t i) const { return 1.0; (void)i; }  // exp(0)

  std::span<const double> row(std::size_t i) {
    if (!full_.empty()) return full_.row(i);
    auto it = cache_.find(i);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return {it->second.first.data(), n_};
    }
    std::vector<double> r(n_);
    for (std::size_t j = 0; j < n_; ++j) r[j] = kernel(i, j);
    if (cache_.size() >= max_cached_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
    lru_.push_front(i);
    auto [ins, ok] = cache_.emplace(i, std::make_pair(std::move(r), lru_.begin()));
    (void)ok;
    return {ins->second.first.data(), n_};
  }

 private:
  double kernel(std::size_t i, std::size_t j) const {
    double dot = 0.0;
    auto ri = x_.row(i);
    auto rj = x_.row(j);
    for (std::size_t k = 0; k < ri.size(); ++k) dot += ri[k] * rj[k];
    return std::exp(-gamma_ * (norms_[i] + norms_[j] - 2.0 * dot));
  }

  const Matrix& x_;
  double gamma_;
  std::size_t n_;
  std::vector<double> norms_;
  Matrix full_;
  std::size_t max_cached_ = 0;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> cache_;
  std::list<std::size_t> lru_;
};

}  // namespace

SmoResult smo_solve(const Matrix& x, const std::vector<int>& y, double c, double gamma,
                    double tol, std::size_t max_iter) {
  const std::size_t n = x.rows;
  if (n == 0 || y.size() != n) {
    throw_validation("DimensionMismatch", "label count must match row count");
  }
  for (int label : y) {
    if (label != 1 && label != -1) {
      throw_validation("BadLabel", "binary labels must be +1/-1");
    }
  }
  if (c <= 0.0 || gamma <= 0.0) {
    throw_validation("BadHyper", "c and gamma must be positive");
  }
  if (max_iter == 0) max_iter = std::max<std::size_t>(10000000, 100 * n);

  KernelCache cache(x, gamma);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a = 0

  auto q_row = [&](std::size_t i) { return cache.row(i); };
  auto q = [&](std::span<const double> row_i, std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * row_i[j];
  };

  SmoResult result;
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // Working-set selection: i is the most violating index in I_up, j the
    // second-order best partner in I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
      if (in_up && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) break;
    auto row_i = q_row(static_cast<std::size_t>(i));

    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
      if (!in_low) continue;
      const double neg_yg = -y[t] * grad[t];
      if (y[t] * grad[t] >= gmax2) gmax2 = y[t] * grad[t];
      const double grad_diff = gmax - neg_yg;
      if (grad_diff > 0.0) {
        double quad = cache.diag(i) + cache.diag(t) - 2.0 * row_i[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (gmax + gmax2 < tol || j < 0) {
      result.converged = true;
      break;
    }

    const std::size_t ii = static_cast<std::size_t>(i);
    const std::size_t jj = static_cast<std::size_t>(j);
    auto row_j = q_row(jj);
    const double old_ai = alpha[ii];
    const double old_aj = alpha[jj];

    if (y[ii] != y[jj]) {
      double quad = cache.diag(ii) + cache.diag(jj) - 2.0 * row_i[jj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[ii] - grad[jj]) / quad;
      const double diff = alpha[ii] - alpha[jj];
      alpha[ii] += delta;
      alpha[jj] += delta;
      if (diff > 0.0) {
        if (alpha[jj] < 0.0) { alpha[jj] = 0.0; alpha[ii] = diff; }
      } else {
        if (alpha[ii] < 0.0) { alpha[ii] = 0.0; alpha[jj] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[ii] > c) { alpha[ii] = c; alpha[jj] = c - diff; }
      } else {
        if (alpha[jj] > c) { alpha[jj] = c; alpha[ii] = c + diff; }
      }
    } else {
      double quad = cache.diag(ii) + cache.diag(jj) - 2.0 * row_i[jj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[ii] - grad[jj]) / quad;
      const double sum = alpha[ii] + alpha[jj];
      alpha[ii] -= delta;
      alpha[jj] += delta;
      if (sum > c) {
        if (alpha[ii] > c) { alpha[ii] = c; alpha[jj] = sum - c; }
      } else {
        if (alpha[jj] < 0.0) { alpha[jj] = 0.0; alpha[ii] = sum; }
      }
      if (sum > c) {
        if (alpha[jj] > c) { alpha[jj] = c; alpha[ii] = sum - c; }
      } else {
        if (alpha[ii] < 0.0) { alpha[ii] = 0.0; alpha[jj] = sum; }
      }
    }

    const double dai = alpha[ii] - old_ai;
    const double daj = alpha[jj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += q(row_i, ii, t) * dai + q(row_j, jj, t) * daj;
    }
  }

  result.alpha = std::move(alpha);
  result.iterations = iter;

  // Offset from the free points when any exist, otherwise the midpoint of
  // the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (result.alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (result.alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  result.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  double min_obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) min_obj += result.alpha[t] * (grad[t] - 1.0);
  result.objective = -min_obj / 2.0;  // flip to the maximization form
  return result;
}

std::vector<double> SvmModel::votes(std::span<const double> row) const {
  std::vector<double> kern(vectors.rows);
  for (std::size_t s = 0; s < vectors.rows; ++s) {
    kern[s] = rbf_kernel(row, vectors.row(s), hyper.gamma);
  }
  std::vector<double> out(n_classes, 0.0);
  for (const BinaryMachine& m : machines) {
    double f = m.bias;
    for (std::size_t s = 0; s < m.sv.size(); ++s) f += m.coef[s] * kern[m.sv[s]];
    out[f > 0.0 ? m.pos : m.neg] += 1.0;
  }
  return out;
}

SvmModel train_svm_ovo(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                       const SvmHyper& hyper, double tol) {
  if (x.rows != y.size()) {
    throw_validation("DimensionMismatch", "label count must match row count");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) throw_validation("NonFiniteInput", "non-finite feature value");
  }
  std::vector<std::vector<std::size_t>> rows_of(n_classes);
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (y[r] < 0 || static_cast<std::size_t>(y[r]) >= n_classes) {
      throw_validation("BadLabel", "class index out of range");
    }
    rows_of[y[r]].push_back(r);
  }
  std::size_t present = 0;
  for (const auto& rows : rows_of) present += rows.empty() ? 0 : 1;
  if (present < 2) throw_validation("SingleClass", "need at least two classes with data");

  SvmModel model;
  model.hyper = hyper;
  model.n_classes = n_classes;

  struct PendingMachine {
    int pos, neg;
    std::vector<std::size_t> orig_rows;  // original row ids of its SVs
    std::vector<double> coef;
    double bias;
  };
  std::vector<PendingMachine> pending;

  for (std::size_t a = 0; a < n_classes; ++a) {
    for (std::size_t b = a + 1; b < n_classes; ++b) {
      if (rows_of[a].empty() || rows_of[b].empty()) continue;
      std::vector<std::size_t> rows;
      rows.reserve(rows_of[a].size() + rows_of[b].size());
      for (std::size_t r = 0; r < y.size(); ++r) {
        if (y[r] == static_cast<int>(a) || y[r] == static_cast<int>(b)) rows.push_back(r);
      }
      Matrix sub(rows.size(), x.cols);
      std::vector<int> lab(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        auto src = x.row(rows[k]);
        std::copy(src.begin(), src.end(), sub.row(k).begin());
        lab[k] = y[rows[k]] == static_cast<int>(a) ? 1 : -1;
      }
      SmoResult res = smo_solve(sub, lab, hyper.c, hyper.gamma, tol);
      PendingMachine m;
      m.pos = static_cast<int>(a);
      m.neg = static_cast<int>(b);
      m.bias = -res.rho;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (res.alpha[k] > 0.0) {
          m.orig_rows.push_back(rows[k]);
          m.coef.push_back(res.alpha[k] * lab[k]);
        }
      }
      pending.push_back(std::move(m));
    }
  }

  // Pack the union of support vectors once; machines index into it.
  std::unordered_map<std::size_t, std::uint32_t> packed;
  std::vector<std::size_t> order;
  for (const auto& m : pending) {
    for (std::size_t r : m.orig_rows) {
      if (packed.emplace(r, static_cast<std::uint32_t>(order.size())).second) {
        order.push_back(r);
      }
    }
  }
  model.vectors = Matrix(order.size(), x.cols);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto src = x.row(order[k]);
    std::copy(src.begin(), src.end(), model.vectors.row(k).begin());
  }
  for (auto& m : pending) {
    BinaryMachine out;
    out.pos = m.pos;
    out.neg = m.neg;
    out.bias = m.bias;
    out.coef = std::move(m.coef);
    out.sv.reserve(m.orig_rows.size());
    for (std::size_t r : m.orig_rows) out.sv.push_back(packed.at(r));
    model.machines.push_back(std::move(out));
  }
  return model;
}

}  // namespace hclass
