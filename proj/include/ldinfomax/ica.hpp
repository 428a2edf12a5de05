#pragma once

// Extended-infomax ICA baseline (natural gradient, block updates).
//
//   W <- W + lr * (B I - K tanh(U) U^T - U U^T) W,   U = W Z_block
//
// K is diagonal with -1 for sub-Gaussian and +1 for super-Gaussian
// components; B is the block length.

#include "ldinfomax/core_stats.hpp"
#include "ldinfomax/random.hpp"
#include "ldinfomax/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace ldinfomax {

struct IcaConfig {
  double learning_rate = 1e-3;
  int max_iter = 500;       // sweeps over the data
  double tol = 1e-7;        // stop when ||W_sweep_change||_F^2 < tol
  std::uint64_t seed = 1;
  int n_subgauss = -1;      // -1: all components sub-Gaussian
  int block_size = 0;       // 0: floor(sqrt(N / 3))
  double anneal_deg = 60.0; // halve the rate when successive changes turn by more
  double anneal_factor = 0.5;
};

struct Whitening {
  Matrix Z;        // r x N, identity sample covariance
  Matrix W_white;  // r x M
  Vector mean;     // M
};

/// PCA whitening onto the top-r principal components.
inline Whitening whiten(const Matrix& y, int r) {
  detail::require(r >= 1 && r <= y.rows(), "whiten: need 1 <= r <= M");
  const Matrix cov = sample_covariance(y);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& vals = eig.eigenvalues();
  const Index m = y.rows();
  const double top = vals(m - 1);
  if (!(top > 0.0) || vals(m - r) <= 1e-12 * top) {
    throw NumericalError("whiten: centered mixtures have rank below r");
  }
  Whitening w;
  w.mean = y.rowwise().mean();
  w.W_white.resize(r, m);
  for (int i = 0; i < r; ++i) {
    const Index k = m - 1 - i;
    w.W_white.row(i) = eig.eigenvectors().col(k).transpose() / std::sqrt(vals(k));
  }
  w.Z = w.W_white * (y.colwise() - w.mean);
  return w;
}

struct IcaResult {
  Matrix W;  // r x r unmixing matrix for whitened data
  int sweeps = 0;
  bool converged = false;
  double final_learning_rate = 0.0;
};

inline double excess_kurtosis(const Eigen::RowVectorXd& x) {
  const double m = x.mean();
  const Eigen::ArrayXd c = x.array() - m;
  const double m2 = c.square().mean();
  return m2 > 0.0 ? c.square().square().mean() / (m2 * m2) - 3.0 : 0.0;
}

inline IcaResult ica_infomax(const Matrix& z, const IcaConfig& cfg) {
  detail::require(cfg.learning_rate > 0.0, "ica_infomax: learning rate must be positive");
  detail::require(z.allFinite(), "ica_infomax: non-finite input");
  const Index r = z.rows();
  const Index n = z.cols();
  const int nsub = cfg.n_subgauss < 0 ? static_cast<int>(r) : cfg.n_subgauss;
  detail::require(nsub <= r, "ica_infomax: n_subgauss exceeds component count");
  const Index block =
      cfg.block_size > 0 ? cfg.block_size
                         : std::max<Index>(1, static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n) / 3.0))));
  detail::require(block <= n, "ica_infomax: block larger than sample count");

  Rng rng(cfg.seed);
  Vector k_signs = Vector::Ones(r);
  for (int i = 0; i < nsub; ++i) k_signs(i) = -1.0;
  const bool adaptive = nsub < r;

  IcaResult res;
  res.W = Matrix::Identity(r, r);
  double lr = cfg.learning_rate;
  Vector prev_delta;
  const Matrix b_eye = static_cast<double>(block) * Matrix::Identity(r, r);
  const double cos_limit = std::cos(cfg.anneal_deg * std::numbers::pi / 180.0);

  Matrix zb(r, block);
  for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    const Matrix w_start = res.W;
    const std::vector<Index> order = random_permutation(rng, n);
    for (Index start = 0; start + block <= n; start += block) {
      for (Index c = 0; c < block; ++c) zb.col(c) = z.col(order[static_cast<std::size_t>(start + c)]);
      const Matrix u = res.W * zb;
      const Matrix y = u.array().tanh().matrix();
      res.W += lr * (b_eye - k_signs.asDiagonal() * (y * u.transpose()) - u * u.transpose()) * res.W;
      if (!res.W.allFinite() || res.W.cwiseAbs().maxCoeff() > 1e8) {
        throw NumericalError("ica_infomax: weights diverged at sweep " + std::to_string(sweep));
      }
    }
    if (adaptive) {
      const Matrix u = res.W * z;
      for (Index i = 0; i < r; ++i) k_signs(i) = excess_kurtosis(u.row(i)) < 0.0 ? -1.0 : 1.0;
    }

    const Matrix dw = res.W - w_start;
    const Vector delta = Eigen::Map<const Vector>(dw.data(), dw.size());
    const double change = delta.squaredNorm();
    res.sweeps = sweep;
    if (prev_delta.size() == delta.size()) {
      const double den = std::sqrt(change * prev_delta.squaredNorm());
      if (den > 0.0 && delta.dot(prev_delta) / den < cos_limit) lr *= cfg.anneal_factor;
    }
    prev_delta = delta;
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.final_learning_rate = lr;
  return res;
}

/// Unmixed estimates W * W_white * (Y - mean): zero-mean, unit-variance rows.
inline Matrix ica_separate(const Matrix& y, int r, const IcaConfig& cfg) {
  const Whitening w = whiten(y, r);
  const IcaResult res = ica_infomax(w.Z, cfg);
  return res.W * w.W_white * (y.colwise() - w.mean);
}

}  // namespace ldinfomax
