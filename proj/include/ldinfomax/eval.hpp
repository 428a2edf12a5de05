#pragma once

// Ground-truth evaluation: permutation/sign alignment, MSE, SINR and
// aggregation over trials.

#include "ldinfomax/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace ldinfomax {

/// Estimated row i is matched to true row perm[i] with sign signs[i].
struct Alignment {
  std::vector<int> perm;
  std::vector<int> signs;

  [[nodiscard]] bool valid() const {
    if (perm.size() != signs.size()) return false;
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<int>(i)) return false;
    }
    return std::all_of(signs.begin(), signs.end(), [](int s) { return s == 1 || s == -1; });
  }
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian
/// method with potentials, O(n^3)).  Returns assignment[row] = column.
inline std::vector<int> solve_assignment(const Matrix& cost) {
  detail::require(cost.rows() == cost.cols(), "solve_assignment: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return assignment;
}

namespace detail {

inline Vector center_or_zero(const std::optional<Vector>& center, Index r) {
  if (!center) return Vector::Zero(r);
  require(center->size() == r, "evaluation: center length differs from source count");
  return *center;
}

/// Row `i` of D Pi S_g under reflection about `c`: c_j + d (s_j - c_j).
inline Eigen::RowVectorXd aligned_truth_row(const Matrix& s_g, const Vector& c, int j, int d) {
  return (c(j) + d * (s_g.row(j).array() - c(j))).matrix();
}

}  // namespace detail

/// Permutation and signs minimizing (1/N)||S_est - D Pi S_g||_F^2.
///
/// The sign ambiguity acts as a reflection about `center` (zero by
/// default, which is the plain sign flip).  The pairwise cost is the exact
/// squared error of the best sign, so the assignment solution is the global
/// MSE minimizer over all r!·2^r alignments.
inline Alignment best_alignment(const Matrix& s_est, const Matrix& s_g,
                                const std::optional<Vector>& center = std::nullopt) {
  detail::require(s_est.rows() == s_g.rows() && s_est.cols() == s_g.cols(),
                  "best_alignment: shape mismatch");
  const Index r = s_g.rows();
  const Vector c = detail::center_or_zero(center, r);
  Matrix cost(r, r);
  Eigen::MatrixXi best_sign(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      const Eigen::RowVectorXd a = s_est.row(i).array() - c(j);
      const Eigen::RowVectorXd b = s_g.row(j).array() - c(j);
      const double cross = a.dot(b);
      best_sign(i, j) = cross >= 0.0 ? 1 : -1;
      cost(i, j) = a.squaredNorm() + b.squaredNorm() - 2.0 * std::abs(cross);
    }
  }
  Alignment al;
  const std::vector<int> assign = solve_assignment(cost);
  al.perm = assign;
  al.signs.resize(assign.size());
  for (std::size_t i = 0; i < assign.size(); ++i) {
    al.signs[i] = best_sign(static_cast<Index>(i), assign[i]);
  }
  return al;
}

/// D Pi S_g (with reflection about `center`) for a given alignment.
inline Matrix apply_alignment(const Matrix& s_g, const Alignment& a,
                              const std::optional<Vector>& center = std::nullopt) {
  detail::require(a.valid() && static_cast<Index>(a.perm.size()) == s_g.rows(),
                  "apply_alignment: invalid alignment");
  const Vector c = detail::center_or_zero(center, s_g.rows());
  Matrix out(s_g.rows(), s_g.cols());
  for (std::size_t i = 0; i < a.perm.size(); ++i) {
    out.row(static_cast<Index>(i)) = detail::aligned_truth_row(s_g, c, a.perm[i], a.signs[i]);
  }
  return out;
}

/// (1/N) ||S_est - D Pi S_g||_F^2.
inline double mse(const Matrix& s_est, const Matrix& s_g, const Alignment& a,
                  const std::optional<Vector>& center = std::nullopt) {
  detail::require(s_est.rows() == s_g.rows() && s_est.cols() == s_g.cols(), "mse: shape mismatch");
  return (s_est - apply_alignment(s_g, a, center)).squaredNorm() / static_cast<double>(s_g.cols());
}

struct EvaluationReport {
  double mse = 0.0;
  double sinr_db = 0.0;
  Alignment alignment;
  Vector per_source_corr;  // |corr| between each estimated row and its match
};

/// Average source power per entry, ||S_g||_F^2 / (r N).
inline double average_source_power(const Matrix& s_g) {
  return s_g.squaredNorm() / static_cast<double>(s_g.size());
}

inline double sinr_from_mse(double power, double err) {
  if (err <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(power / err);
}

inline EvaluationReport evaluate(const Matrix& s_est, const Matrix& s_g,
                                 const std::optional<Vector>& center = std::nullopt) {
  EvaluationReport rep;
  rep.alignment = best_alignment(s_est, s_g, center);
  rep.mse = mse(s_est, s_g, rep.alignment, center);
  rep.sinr_db = sinr_from_mse(average_source_power(s_g), rep.mse);
  const Matrix e = detail::row_centered(s_est);
  const Matrix t = detail::row_centered(s_g);
  rep.per_source_corr.resize(s_g.rows());
  for (Index i = 0; i < s_g.rows(); ++i) {
    const auto j = static_cast<Index>(rep.alignment.perm[static_cast<std::size_t>(i)]);
    const double den = e.row(i).norm() * t.row(j).norm();
    rep.per_source_corr(i) = den > 0.0 ? std::abs(e.row(i).dot(t.row(j))) / den : 0.0;
  }
  return rep;
}

/// 10 log10(P_s / MSE) under the MSE-optimal alignment; +inf when exact.
inline double sinr_db(const Matrix& s_est, const Matrix& s_g,
                      const std::optional<Vector>& center = std::nullopt) {
  return evaluate(s_est, s_g, center).sinr_db;
}

/// Resolves the scale and offset ambiguity of estimators whose outputs
/// carry no amplitude information (ICA): rows are matched to the truth by
/// maximal total |correlation|, then each matched row gets the
/// least-squares gain and offset onto its true source.  The result is
/// returned in truth row order.
inline Matrix affine_calibrate(const Matrix& s_est, const Matrix& s_g) {
  detail::require(s_est.rows() == s_g.rows() && s_est.cols() == s_g.cols(),
                  "affine_calibrate: shape mismatch");
  const Index r = s_g.rows();
  const Matrix e = detail::row_centered(s_est);
  const Matrix t = detail::row_centered(s_g);
  Matrix cost(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      const double den = e.row(i).norm() * t.row(j).norm();
      cost(i, j) = den > 0.0 ? -std::abs(e.row(i).dot(t.row(j))) / den : 0.0;
    }
  }
  const std::vector<int> assign = solve_assignment(cost);
  Matrix out(r, s_g.cols());
  for (Index i = 0; i < r; ++i) {
    const auto j = static_cast<Index>(assign[static_cast<std::size_t>(i)]);
    const double ee = e.row(i).squaredNorm();
    const double gain = ee > 0.0 ? e.row(i).dot(t.row(j)) / ee : 0.0;
    out.row(j) = (gain * e.row(i).array() + s_g.row(j).mean()).matrix();
  }
  return out;
}

/// Mean and population standard deviation of a series over trials.
struct CurveSummary {
  std::vector<long> grid;
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// `series[t][g]` is trial t's value at grid point g; every trial must
/// cover the whole grid.
inline CurveSummary aggregate(const std::vector<std::vector<double>>& series,
                              const std::vector<long>& grid) {
  detail::require(!series.empty(), "aggregate: no trials");
  for (const auto& s : series) {
    detail::require(s.size() == grid.size(), "aggregate: trial series does not match grid");
  }
  CurveSummary out;
  out.grid = grid;
  out.mean.resize(grid.size());
  out.stddev.resize(grid.size());
  const double n = static_cast<double>(series.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (const auto& s : series) sum += s[g];
    const double m = sum / n;
    double ss = 0.0;
    for (const auto& s : series) ss += (s[g] - m) * (s[g] - m);
    out.mean[g] = m;
    out.stddev[g] = std::sqrt(ss / n);
  }
  return out;
}

}  // namespace ldinfomax
