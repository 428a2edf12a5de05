#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ldinfomax {

/// Column-major sample matrix: rows are channels, columns are time samples.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A factorization or solve failed on a matrix that should have been
/// positive definite, or an iterate became non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A projection did not reach the feasibility tolerance.
class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline Matrix row_centered(const Matrix& x) {
  return x.colwise() - x.rowwise().mean();
}

}  // namespace detail
}  // namespace ldinfomax
