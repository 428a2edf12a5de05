#pragma once

// Sample statistics and log-determinant (LD) information measures.
//
// All covariances use the biased 1/N normalization:
//   R_x  = (1/N) X X^T - (1/N^2) X 1 1^T X^T
//   R_sy = (1/N) S Y^T - (1/N^2) S 1 1^T Y^T
// and every log-determinant goes through a Cholesky factorization of the
// explicitly symmetrized, epsilon-shifted matrix.

#include "ldinfomax/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ldinfomax {

/// Per-dimension constant of the LD-entropy, log(2*pi*e).
inline constexpr double kLog2PiE = 2.8378770664093453;  // log(2*pi) + 1

inline void validate_samples(const Matrix& x, const char* what) {
  detail::require(x.cols() >= 2, std::string(what) + ": need at least 2 samples");
  detail::require(x.rows() >= 1, std::string(what) + ": need at least 1 channel");
  detail::require(x.allFinite(), std::string(what) + ": non-finite entries");
}

/// Biased sample covariance of the rows of `x`.
inline Matrix sample_covariance(const Matrix& x) {
  validate_samples(x, "sample_covariance");
  const Matrix xc = detail::row_centered(x);
  return detail::symmetrized(xc * xc.transpose() / static_cast<double>(x.cols()));
}

/// Biased sample cross-covariance, r x M for s (r x N) and y (M x N).
inline Matrix cross_covariance(const Matrix& s, const Matrix& y) {
  validate_samples(s, "cross_covariance");
  validate_samples(y, "cross_covariance");
  detail::require(s.cols() == y.cols(), "cross_covariance: sample counts differ");
  return detail::row_centered(s) * detail::row_centered(y).transpose() /
         static_cast<double>(s.cols());
}

/// log det(a) for a symmetric positive definite `a`. Throws NumericalError
/// when the Cholesky factorization fails (some eigenvalue <= 0).
inline double logdet_spd(const Matrix& a) {
  detail::require(a.rows() == a.cols(), "logdet_spd: matrix not square");
  Eigen::LLT<Matrix> llt(detail::symmetrized(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("logdet_spd: matrix is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// ½ logdet(cov + eps I) + (r/2) log(2 pi e).
inline double ld_entropy(const Matrix& cov, double epsilon) {
  detail::require(epsilon > 0.0, "ld_entropy: epsilon must be positive");
  const Index r = cov.rows();
  const Matrix shifted = cov + epsilon * Matrix::Identity(r, r);
  return 0.5 * logdet_spd(shifted) + 0.5 * static_cast<double>(r) * kLog2PiE;
}

/// Sample covariances of an (s, y) pair together with the regularizer.
struct CovarianceBundle {
  Matrix r_s;   // r x r
  Matrix r_y;   // M x M
  Matrix r_sy;  // r x M
  double epsilon = 1e-5;
};

inline CovarianceBundle make_bundle(const Matrix& s, const Matrix& y, double epsilon) {
  detail::require(epsilon > 0.0, "make_bundle: epsilon must be positive");
  return {sample_covariance(s), sample_covariance(y), cross_covariance(s, y), epsilon};
}

/// R_e = r_s - r_sy (r_y + eps I)^{-1} r_sy^T: covariance of the error of the
/// best affine estimate of s from y, with an eps-regularized solve.
inline Matrix conditional_error_covariance(const CovarianceBundle& b) {
  detail::require(b.epsilon > 0.0, "conditional_error_covariance: epsilon must be positive");
  detail::require(b.r_s.rows() == b.r_sy.rows() && b.r_y.rows() == b.r_sy.cols(),
                  "conditional_error_covariance: inconsistent bundle shapes");
  const Index m = b.r_y.rows();
  Eigen::LLT<Matrix> llt(detail::symmetrized(b.r_y) + b.epsilon * Matrix::Identity(m, m));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("conditional_error_covariance: r_y + eps I is not positive definite");
  }
  const Matrix reduction = b.r_sy * llt.solve(b.r_sy.transpose());
  return detail::symmetrized(b.r_s - reduction);
}

/// Deterministic LD-mutual information from a precomputed bundle:
///   ½ logdet(R_s + eps I) - ½ logdet(R_e + eps I).
inline double ld_mutual_information(const CovarianceBundle& b) {
  const Index r = b.r_s.rows();
  const Matrix eye = b.epsilon * Matrix::Identity(r, r);
  const Matrix r_e = conditional_error_covariance(b);
  return 0.5 * logdet_spd(b.r_s + eye) - 0.5 * logdet_spd(r_e + eye);
}

/// Deterministic LD-mutual information between output samples `s` and
/// input samples `y`. Nonnegative up to rounding; zero iff the sample
/// cross-covariance vanishes.
inline double ld_mutual_information(const Matrix& s, const Matrix& y, double epsilon) {
  return ld_mutual_information(make_bundle(s, y, epsilon));
}

}  // namespace ldinfomax
