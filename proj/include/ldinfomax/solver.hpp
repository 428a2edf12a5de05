#pragma once

// Projected-gradient ascent on the LD-mutual information between the
// mixtures Y and the source estimates S, with the columns of S held inside
// a polytope:
//
//   S <- P(S + mu_k * grad_S I(Y, S)),   mu_k = mu0 / sqrt(k + 1).

#include "ldinfomax/core_stats.hpp"
#include "ldinfomax/eval.hpp"
#include "ldinfomax/polytope.hpp"
#include "ldinfomax/random.hpp"
#include "ldinfomax/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ldinfomax {

enum class Schedule { InverseSqrt, Constant };
enum class InitStrategy { ProjectedRandomMap, Random };

inline const char* to_string(Schedule s) {
  return s == Schedule::InverseSqrt ? "inverse-sqrt" : "constant";
}
inline const char* to_string(InitStrategy s) {
  return s == InitStrategy::ProjectedRandomMap ? "projected-random-map" : "random";
}
inline Schedule parse_schedule(const std::string& s) {
  if (s == "inverse-sqrt") return Schedule::InverseSqrt;
  if (s == "constant") return Schedule::Constant;
  throw std::invalid_argument("unknown step schedule '" + s + "'");
}
inline InitStrategy parse_init(const std::string& s) {
  if (s == "projected-random-map") return InitStrategy::ProjectedRandomMap;
  if (s == "random") return InitStrategy::Random;
  throw std::invalid_argument("unknown init strategy '" + s + "'");
}

struct SolverConfig {
  double epsilon = 1e-5;
  double mu0 = 200.0;
  long iterations = 10000;
  Schedule schedule = Schedule::InverseSqrt;
  std::uint64_t seed = 1;
  long record_every = 100;
  InitStrategy init = InitStrategy::ProjectedRandomMap;
  ProjectionOptions projection{};

  void validate() const {
    detail::require(epsilon > 0.0, "solver: epsilon must be positive");
    detail::require(mu0 > 0.0, "solver: mu0 must be positive");
    detail::require(iterations >= 0, "solver: iterations must be nonnegative");
    detail::require(record_every >= 1, "solver: record_every must be >= 1");
  }
};

inline double step_size(const SolverConfig& cfg, long k) {
  if (cfg.schedule == Schedule::Constant) return cfg.mu0;
  return cfg.mu0 / std::sqrt(static_cast<double>(k) + 1.0);
}

/// Quantities that depend only on the mixtures: R_y, its regularized
/// Cholesky factor and (R_y + eps I)^{-1} (Y - mean).
class MixtureCache {
 public:
  MixtureCache(const Matrix& y, double epsilon) : epsilon_(epsilon) {
    validate_samples(y, "MixtureCache");
    detail::require(epsilon > 0.0, "MixtureCache: epsilon must be positive");
    y_centered_ = detail::row_centered(y);
    r_y_ = detail::symmetrized(y_centered_ * y_centered_.transpose() / static_cast<double>(y.cols()));
    llt_.compute(r_y_ + epsilon * Matrix::Identity(y.rows(), y.rows()));
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("MixtureCache: R_y + eps I is not positive definite");
    }
    solved_ = llt_.solve(y_centered_);
  }

  [[nodiscard]] const Matrix& centered() const { return y_centered_; }
  [[nodiscard]] const Matrix& covariance() const { return r_y_; }
  /// (R_y + eps I)^{-1} (Y - mean)
  [[nodiscard]] const Matrix& solved() const { return solved_; }
  [[nodiscard]] const Eigen::LLT<Matrix>& factor() const { return llt_; }
  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] Index samples() const { return y_centered_.cols(); }

 private:
  double epsilon_;
  Matrix y_centered_;
  Matrix r_y_;
  Eigen::LLT<Matrix> llt_;
  Matrix solved_;
};

struct ObjectiveAndGradient {
  double objective = 0.0;
  Matrix gradient;
};

/// Objective and gradient at S:
///   grad = (1/N)(R_s + eps I)^{-1} S C - (1/N)(R_e + eps I)^{-1}(S - R_sy (R_y + eps I)^{-1} Y) C
/// where C = I - (1/N) 1 1^T is applied as row-mean subtraction.
inline ObjectiveAndGradient objective_and_gradient(const Matrix& s, const MixtureCache& y) {
  detail::require(s.cols() == y.samples(), "gradient: sample counts differ");
  detail::require(s.allFinite(), "gradient: non-finite iterate");
  const double n = static_cast<double>(s.cols());
  const Index r = s.rows();
  const double eps = y.epsilon();
  const Matrix eye = eps * Matrix::Identity(r, r);

  const Matrix s_c = detail::row_centered(s);
  const Matrix r_s = detail::symmetrized(s_c * s_c.transpose() / n);
  const Matrix r_sy = s_c * y.centered().transpose() / n;
  const Matrix r_e = detail::symmetrized(r_s - r_sy * y.factor().solve(r_sy.transpose()));

  Eigen::LLT<Matrix> llt_s(r_s + eye);
  Eigen::LLT<Matrix> llt_e(r_e + eye);
  if (llt_s.info() != Eigen::Success || llt_e.info() != Eigen::Success) {
    throw NumericalError("gradient: regularized covariance is not positive definite");
  }
  // The residual (S - R_sy (R_y + eps I)^{-1} Y) C equals S C - R_sy * solved().
  const Matrix resid = s_c - r_sy * y.solved();

  ObjectiveAndGradient out;
  out.gradient = (llt_s.solve(s_c) - llt_e.solve(resid)) / n;
  out.objective = llt_s.matrixLLT().diagonal().array().log().sum() -
                  llt_e.matrixLLT().diagonal().array().log().sum();
  return out;
}

inline Matrix gradient(const Matrix& s, const Matrix& y, double epsilon) {
  return objective_and_gradient(s, MixtureCache(y, epsilon)).gradient;
}

struct InitResult {
  Matrix S;
  bool fell_back = false;  // default strategy fell back to "random"
};

/// Initial feasible iterate.
///
/// projected-random-map: whiten Y onto its top-r principal components,
/// rotate by a random orthonormal map, scale by the largest column norm,
/// shift nonneg coordinates by +0.5 and project the columns.
/// random: i.i.d. uniform entries over each coordinate's box, projected.
inline InitResult initialize(const Matrix& y, const PolytopeSpec& p, const SolverConfig& cfg) {
  p.validate();
  const Index r = p.dim();
  const Index n = y.cols();
  Rng rng(cfg.seed);
  InitResult out;

  auto random_init = [&]() {
    Matrix u = uniform01(rng, r, n);
    for (Index i = 0; i < r; ++i) {
      if (p.domains[static_cast<std::size_t>(i)] == Domain::Signed) {
        u.row(i) = (2.0 * u.row(i).array() - 1.0).matrix();
      }
    }
    return project_columns(p, u, cfg.projection);
  };

  if (cfg.init == InitStrategy::Random) {
    out.S = random_init();
    return out;
  }

  const Matrix cov = sample_covariance(y);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& vals = eig.eigenvalues();  // ascending
  const Index m = y.rows();
  const double top = vals(m - 1);
  if (r > m || top <= 0.0 || vals(m - r) <= 1e-12 * top) {
    out.fell_back = true;
    out.S = random_init();
    return out;
  }
  Matrix whitener(r, m);
  for (Index i = 0; i < r; ++i) {
    const Index k = m - 1 - i;
    whitener.row(i) = eig.eigenvectors().col(k).transpose() / std::sqrt(vals(k));
  }
  Matrix s = random_orthonormal(rng, r) * (whitener * detail::row_centered(y));
  const double max_norm = s.colwise().norm().maxCoeff();
  if (max_norm > 0.0) s /= max_norm;
  for (Index i = 0; i < r; ++i) {
    if (p.domains[static_cast<std::size_t>(i)] == Domain::Nonneg) s.row(i).array() += 0.5;
  }
  out.S = project_columns(p, s, cfg.projection);
  return out;
}

struct TrajectoryPoint {
  long iteration = 0;
  double objective = 0.0;
  std::optional<double> sinr_db;
};

struct SolverState {
  Matrix S;
  long k = 0;
  double objective = 0.0;
  std::vector<TrajectoryPoint> trajectory;
};

/// One projected-gradient step from `state`.
inline SolverState step(const SolverState& state, const MixtureCache& y, const PolytopeSpec& p,
                        const SolverConfig& cfg) {
  const ObjectiveAndGradient og = objective_and_gradient(state.S, y);
  SolverState next;
  next.S = project_columns(p, state.S + step_size(cfg, state.k) * og.gradient, cfg.projection);
  next.k = state.k + 1;
  next.objective = ld_mutual_information(next.S, y.centered(), y.epsilon());
  next.trajectory = state.trajectory;
  return next;
}

/// Ground truth for recording SINR along the trajectory.
struct TruthReference {
  Matrix S_g;
  std::optional<Vector> center;
};

enum class RunStatus { Completed, Diverged };

struct RunResult {
  SolverState state;  // final state, or the last finite state on divergence
  RunStatus status = RunStatus::Completed;
  std::string message;
  bool init_fell_back = false;
};

/// Runs cfg.iterations steps from the configured initialization, recording
/// (k, objective[, SINR]) at k = 0, every record_every steps and at the end.
inline RunResult run(const Matrix& y, const PolytopeSpec& p, const SolverConfig& cfg,
                     const TruthReference* truth = nullptr) {
  cfg.validate();
  detail::require(y.cols() >= 2, "run: need at least 2 samples");
  const MixtureCache cache(y, cfg.epsilon);
  InitResult init = initialize(y, p, cfg);

  RunResult res;
  res.init_fell_back = init.fell_back;
  SolverState& st = res.state;
  st.S = std::move(init.S);
  st.k = 0;

  auto record = [&](const Matrix& s, long k, double obj) {
    TrajectoryPoint pt{k, obj, std::nullopt};
    if (truth) pt.sinr_db = sinr_db(s, truth->S_g, truth->center);
    st.trajectory.push_back(pt);
  };

  ObjectiveAndGradient og = objective_and_gradient(st.S, cache);
  st.objective = og.objective;
  record(st.S, 0, st.objective);

  for (long k = 0; k < cfg.iterations; ++k) {
    Matrix next = project_columns(p, st.S + step_size(cfg, k) * og.gradient, cfg.projection);
    if (!next.allFinite()) {
      res.status = RunStatus::Diverged;
      res.message = "non-finite iterate at k=" + std::to_string(k + 1);
      return res;
    }
    try {
      og = objective_and_gradient(next, cache);
    } catch (const NumericalError& e) {
      res.status = RunStatus::Diverged;
      res.message = std::string(e.what()) + " at k=" + std::to_string(k + 1);
      return res;
    }
    if (!std::isfinite(og.objective)) {
      res.status = RunStatus::Diverged;
      res.message = "non-finite objective at k=" + std::to_string(k + 1);
      return res;
    }
    st.S = std::move(next);
    st.k = k + 1;
    st.objective = og.objective;
    if (st.k % cfg.record_every == 0 || st.k == cfg.iterations) record(st.S, st.k, st.objective);
  }
  return res;
}

/// CSV with header "iteration,objective" plus ",sinr_db" when any point
/// carries SINR.
inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& traj) {
  const bool with_sinr = !traj.empty() && traj.front().sinr_db.has_value();
  const auto old_prec = os.precision(12);
  os << "iteration,objective" << (with_sinr ? ",sinr_db" : "") << '\n';
  for (const auto& pt : traj) {
    os << pt.iteration << ',' << pt.objective;
    if (with_sinr) os << ',' << pt.sinr_db.value_or(std::nan(""));
    os << '\n';
  }
  os.precision(old_prec);
}

}  // namespace ldinfomax
