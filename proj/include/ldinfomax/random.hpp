#pragma once

#include "ldinfomax/types.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cstdint>
#include <numeric>
#include <vector>

namespace ldinfomax {

/// Seedable engine with a fixed, documented algorithm.  Boost's
/// distributions are used (not <random>'s) because their sampling
/// algorithms are identical across standard libraries.
using Rng = boost::random::mt19937_64;

inline Matrix standard_normal(Rng& rng, Index rows, Index cols) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Matrix uniform01(Rng& rng, Index rows, Index cols) {
  boost::random::uniform_01<double> unif;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = unif(rng);
  }
  return m;
}

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<Index> random_permutation(Rng& rng, Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  return idx;
}

/// Haar-ish random orthonormal matrix from the QR factorization of a
/// Gaussian matrix, with column signs fixed by the R diagonal.
inline Matrix random_orthonormal(Rng& rng, Index n) {
  const Matrix g = standard_normal(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace ldinfomax
