#pragma once

// Synthetic scenarios: dependent copula-t sources placed in a polytope,
// Gaussian mixing, SNR-controlled white noise.

#include "ldinfomax/polytope.hpp"
#include "ldinfomax/random.hpp"
#include "ldinfomax/types.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/random/chi_squared_distribution.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace ldinfomax {

enum class SourceMode { CopulaT, UniformIid };
enum class PlacementMode { Reject, Scale };

inline const char* to_string(SourceMode m) {
  return m == SourceMode::CopulaT ? "copula_t" : "uniform_iid";
}
inline const char* to_string(PlacementMode m) {
  return m == PlacementMode::Reject ? "reject" : "scale";
}
inline SourceMode parse_source_mode(const std::string& s) {
  if (s == "copula_t") return SourceMode::CopulaT;
  if (s == "uniform_iid") return SourceMode::UniformIid;
  throw std::invalid_argument("unknown source mode '" + s + "'");
}
inline PlacementMode parse_placement_mode(const std::string& s) {
  if (s == "reject") return PlacementMode::Reject;
  if (s == "scale") return PlacementMode::Scale;
  throw std::invalid_argument("unknown placement mode '" + s + "'");
}

struct ScenarioConfig {
  int r = 5;
  int M = 8;
  int N = 10000;
  double rho = 0.5;
  double dof = 4.0;
  std::optional<double> snr_db = 30.0;  // nullopt: noiseless
  PolytopeSpec polytope = PolytopeSpec::linf_nonneg(5);
  std::uint64_t seed = 1;
  SourceMode source_mode = SourceMode::CopulaT;
  PlacementMode placement = PlacementMode::Reject;

  void validate() const {
    detail::require(r >= 1, "scenario: r must be >= 1");
    detail::require(M >= r, "scenario: need M >= r (over)determined mixing");
    detail::require(N >= 1, "scenario: N must be >= 1");
    detail::require(dof >= 1.0, "scenario: dof must be >= 1");
    detail::require(polytope.dim() == r, "scenario: polytope dimension differs from r");
    polytope.validate();
  }
};

struct Scenario {
  Matrix S_g;  // r x N
  Matrix H_g;  // M x r
  Matrix Y;    // M x N
  double noise_sigma = 0.0;
  double acceptance_rate = 1.0;
};

/// Equicorrelation matrix: ones on the diagonal, rho elsewhere.  This is
/// the Toeplitz matrix generated by the first row [1, rho, ..., rho].
inline Matrix toeplitz_correlation(int r, double rho) {
  detail::require(r >= 1, "toeplitz_correlation: r must be >= 1");
  if (r > 1) {
    const double lower = -1.0 / static_cast<double>(r - 1);
    detail::require(rho > lower && rho < 1.0,
                    "toeplitz_correlation: rho outside (-1/(r-1), 1); matrix not positive definite");
  }
  Matrix c = Matrix::Constant(r, r, rho);
  c.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("toeplitz_correlation: matrix not positive definite");
  }
  return c;
}

/// Dependent uniforms from a t-copula: multivariate-t draws (correlated
/// Gaussian scaled by sqrt(dof / chi2_dof)) pushed through the univariate
/// t CDF.  Consumes randomness from `rng`.
inline Matrix copula_t_uniforms(int r, Index n, double rho, double dof, Rng& rng) {
  detail::require(dof >= 1.0, "copula_t_uniforms: dof must be >= 1");
  const Matrix chol = toeplitz_correlation(r, rho).llt().matrixL();
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::chi_squared_distribution<double> chi2(dof);
  const boost::math::students_t_distribution<double> tdist(dof);
  Matrix u(r, n);
  Vector z(r);
  for (Index j = 0; j < n; ++j) {
    for (int i = 0; i < r; ++i) z(i) = normal(rng);
    const double w = chi2(rng);
    const double scale = std::sqrt(dof / w);
    const Vector t = scale * (chol * z);
    for (int i = 0; i < r; ++i) u(i, j) = boost::math::cdf(tdist, t(i));
  }
  return u;
}

inline Matrix copula_t_uniforms(int r, Index n, double rho, double dof, std::uint64_t seed) {
  Rng rng(seed);
  return copula_t_uniforms(r, n, rho, dof, rng);
}

/// Draws `count` uniforms (r x count) per call.
using UniformSource = std::function<Matrix(Index count)>;

struct PlacementResult {
  Matrix sources;
  double acceptance_rate = 1.0;
};

namespace detail {

inline Vector map_to_box(const PolytopeSpec& p, const Vector& u) {
  Vector s = u;
  for (int i = 0; i < p.dim(); ++i) {
    if (p.domains[static_cast<std::size_t>(i)] == Domain::Signed) s(i) = 2.0 * u(i) - 1.0;
  }
  return s;
}

inline bool groups_ok(const PolytopeSpec& p, const Vector& s) {
  for (const auto& g : p.l1_groups) {
    double norm = 0.0;
    for (int i : g) norm += std::abs(s(i));
    if (norm > 1.0) return false;
  }
  return true;
}

}  // namespace detail

/// Maps uniforms in [0,1]^r into the polytope: nonneg coordinates keep u,
/// signed coordinates become 2u - 1, then l1 groups are enforced by
/// rejection (redrawing from `draw`) or by rescaling violating groups.
inline PlacementResult sources_in_polytope(const UniformSource& draw, const PolytopeSpec& p,
                                           Index n, PlacementMode mode,
                                           double min_acceptance = 1e-4) {
  p.validate();
  PlacementResult out;
  out.sources.resize(p.dim(), n);

  if (mode == PlacementMode::Scale || p.l1_groups.empty()) {
    const Matrix u = draw(n);
    detail::require(u.rows() == p.dim() && u.cols() == n, "sources_in_polytope: bad uniform batch");
    for (Index j = 0; j < n; ++j) {
      Vector s = detail::map_to_box(p, u.col(j));
      for (const auto& g : p.l1_groups) {
        double norm = 0.0;
        for (int i : g) norm += std::abs(s(i));
        if (norm > 1.0) {
          const double f = norm * (1.0 + 1e-9);
          for (int i : g) s(i) /= f;
        }
      }
      out.sources.col(j) = s;
    }
    return out;
  }

  // Rejection: judge the acceptance rate once at least this many
  // candidates have been drawn.
  constexpr Index kMinDrawsForRateCheck = 1'000'000;
  const Index batch = std::max<Index>(n, 4096);
  Index accepted = 0;
  Index drawn = 0;
  while (accepted < n) {
    const Matrix u = draw(batch);
    detail::require(u.rows() == p.dim(), "sources_in_polytope: bad uniform batch");
    for (Index j = 0; j < u.cols() && accepted < n; ++j) {
      ++drawn;
      Vector s = detail::map_to_box(p, u.col(j));
      if (detail::groups_ok(p, s)) out.sources.col(accepted++) = s;
    }
    if (accepted < n && drawn >= kMinDrawsForRateCheck &&
        static_cast<double>(accepted) / static_cast<double>(drawn) < min_acceptance) {
      throw std::runtime_error(
          "sources_in_polytope: rejection acceptance rate below " + std::to_string(min_acceptance) +
          "; use placement mode 'scale' for this polytope");
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(drawn);
  return out;
}

/// M x r matrix of i.i.d. N(0,1) entries with full column rank (redrawn up
/// to 10 times).
inline Matrix mixing_matrix(int M, int r, Rng& rng) {
  detail::require(M >= r && r >= 1, "mixing_matrix: need M >= r >= 1");
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix h = standard_normal(rng, M, r);
    Eigen::ColPivHouseholderQR<Matrix> qr(h);
    if (qr.rank() == r) return h;
  }
  throw NumericalError("mixing_matrix: could not draw a full-rank matrix in 10 attempts");
}

inline Matrix mixing_matrix(int M, int r, std::uint64_t seed) {
  Rng rng(seed);
  return mixing_matrix(M, r, rng);
}

struct NoisyMixture {
  Matrix Y;
  double sigma = 0.0;
};

/// Adds i.i.d. N(0, sigma^2) noise with sigma^2 = P_signal / 10^(snr/10)
/// and P_signal = ||Y_clean||_F^2 / (M N).  nullopt or +inf means noiseless.
inline NoisyMixture add_noise(const Matrix& y_clean, std::optional<double> snr_db, Rng& rng) {
  if (!snr_db || std::isinf(*snr_db)) return {y_clean, 0.0};
  const double power = y_clean.squaredNorm() / static_cast<double>(y_clean.size());
  detail::require(power > 0.0, "add_noise: clean mixture is identically zero");
  const double sigma = std::sqrt(power / std::pow(10.0, *snr_db / 10.0));
  return {y_clean + sigma * standard_normal(rng, y_clean.rows(), y_clean.cols()), sigma};
}

/// Full scenario from one seeded engine: sources, then mixing, then noise.
inline Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  UniformSource draw;
  if (cfg.source_mode == SourceMode::CopulaT) {
    draw = [&](Index count) { return copula_t_uniforms(cfg.r, count, cfg.rho, cfg.dof, rng); };
  } else {
    draw = [&](Index count) { return uniform01(rng, cfg.r, count); };
  }
  PlacementResult placed = sources_in_polytope(draw, cfg.polytope, cfg.N, cfg.placement);

  Scenario sc;
  sc.S_g = std::move(placed.sources);
  sc.acceptance_rate = placed.acceptance_rate;
  sc.H_g = mixing_matrix(cfg.M, cfg.r, rng);
  NoisyMixture noisy = add_noise(sc.H_g * sc.S_g, cfg.snr_db, rng);
  sc.Y = std::move(noisy.Y);
  sc.noise_sigma = noisy.sigma;
  return sc;
}

/// 10 log10(P_clean / P_noise) measured on a realized mixture.
inline double realized_snr_db(const Matrix& y_clean, const Matrix& y_noisy) {
  const double noise = (y_noisy - y_clean).squaredNorm();
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(y_clean.squaredNorm() / noise);
}

}  // namespace ldinfomax
