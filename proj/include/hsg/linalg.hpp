#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <span>
#include <string>

#include "hsg/errors.hpp"

namespace hsg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline double pairwise_sum_impl(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(x, half) + pairwise_sum_impl(x + half, n - half);
}

}  // namespace detail

/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
inline double pairwise_sum(std::span<const double> x) {
  return detail::pairwise_sum_impl(x.data(), x.size());
}

inline double pairwise_sum(const Vector& x) {
  return detail::pairwise_sum_impl(x.data(), static_cast<std::size_t>(x.size()));
}

/// sum_i w_i * x_i^2 with pairwise accumulation.
inline double weighted_sum_of_squares(const Vector& x, const Vector& w) {
  const Vector t = w.cwiseProduct(x.cwiseAbs2());
  return pairwise_sum(t);
}

inline double sum_of_squares(const Vector& x) {
  const Vector t = x.cwiseAbs2();
  return pairwise_sum(t);
}

/// Cholesky factor of a symmetric positive (semi)definite matrix.
///
/// On failure adds jitter = 1e-12 * mean(diag) to the diagonal, escalating by
/// factors of 10 up to 1e-6 * mean(diag); throws NumericalError beyond that.
/// `jitter_used` receives the absolute jitter actually added (0 if none).
inline Eigen::LLT<Matrix> robust_cholesky(const Matrix& a, double* jitter_used = nullptr) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    if (jitter_used) *jitter_used = 0.0;
    return llt;
  }
  const double mean_diag = a.diagonal().mean();
  const double base = std::isfinite(mean_diag) && mean_diag > 0 ? mean_diag : 1.0;
  for (double rel = 1e-12; rel <= 1e-6 * (1 + 1e-9); rel *= 10.0) {
    Matrix b = a;
    b.diagonal().array() += rel * base;
    llt.compute(b);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = rel * base;
      return llt;
    }
  }
  throw NumericalError("cholesky: matrix not positive definite even after jitter 1e-6*mean(diag)");
}

/// Numerical rank by singular-value thresholding at
/// max(rows, cols) * sigma_max * 2^-52.
inline Eigen::Index numerical_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double eps =
      static_cast<double>(std::max(a.rows(), a.cols())) * s(0) * std::ldexp(1.0, -52);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > eps) ++r;
  return r;
}

inline bool is_symmetric(const Matrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace hsg
