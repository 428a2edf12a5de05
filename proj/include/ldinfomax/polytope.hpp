#pragma once

// Polytopes built from per-coordinate boxes ([-1,1] or [0,1]) intersected
// with l1-norm balls on coordinate groups, plus Euclidean projection onto
// them.  Disjoint groups are projected exactly; overlapping groups go
// through Dykstra's alternating projection with correction terms.

#include "ldinfomax/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ldinfomax {

enum class Domain { Signed, Nonneg };

inline const char* to_string(Domain d) { return d == Domain::Signed ? "signed" : "nonneg"; }

inline Domain parse_domain(const std::string& s) {
  if (s == "signed") return Domain::Signed;
  if (s == "nonneg") return Domain::Nonneg;
  throw std::invalid_argument("unknown domain tag '" + s + "'");
}

struct PolytopeSpec {
  /// Preset name: "l1", "linf", "l1_nonneg", "linf_nonneg", "example" or "custom".
  std::string name = "custom";
  std::vector<Domain> domains;
  /// Each group carries the constraint ||s_group||_1 <= 1.
  std::vector<std::vector<int>> l1_groups;

  [[nodiscard]] int dim() const { return static_cast<int>(domains.size()); }

  void validate() const {
    detail::require(!domains.empty(), "polytope: dimension must be positive");
    for (const auto& g : l1_groups) {
      detail::require(!g.empty(), "polytope: empty l1 group");
      std::vector<int> sorted = g;
      std::sort(sorted.begin(), sorted.end());
      detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                      "polytope: duplicate index within an l1 group");
      detail::require(sorted.front() >= 0 && sorted.back() < dim(),
                      "polytope: l1 group index out of range");
    }
  }

  /// True when no coordinate belongs to two groups.
  [[nodiscard]] bool groups_disjoint() const {
    std::vector<int> seen(domains.size(), 0);
    for (const auto& g : l1_groups) {
      for (int i : g) {
        if (seen[static_cast<std::size_t>(i)]++) return false;
      }
    }
    return true;
  }

  static PolytopeSpec custom(std::vector<Domain> domains, std::vector<std::vector<int>> groups) {
    PolytopeSpec p{"custom", std::move(domains), std::move(groups)};
    p.validate();
    return p;
  }

  static PolytopeSpec l1(int r) { return preset("l1", r, Domain::Signed, true); }
  static PolytopeSpec linf(int r) { return preset("linf", r, Domain::Signed, false); }
  static PolytopeSpec l1_nonneg(int r) { return preset("l1_nonneg", r, Domain::Nonneg, true); }
  static PolytopeSpec linf_nonneg(int r) { return preset("linf_nonneg", r, Domain::Nonneg, false); }

  /// Three coordinates: s1, s2 signed, s3 nonnegative, with sparsity
  /// coupling ||(s1,s2)||_1 <= 1 and ||(s2,s3)||_1 <= 1.
  static PolytopeSpec example() {
    PolytopeSpec p{"example", {Domain::Signed, Domain::Signed, Domain::Nonneg}, {{0, 1}, {1, 2}}};
    p.validate();
    return p;
  }

  static PolytopeSpec from_name(const std::string& name, int r) {
    if (name == "l1") return l1(r);
    if (name == "linf") return linf(r);
    if (name == "l1_nonneg") return l1_nonneg(r);
    if (name == "linf_nonneg") return linf_nonneg(r);
    if (name == "example") {
      detail::require(r == 3, "polytope 'example' is three-dimensional");
      return example();
    }
    throw std::invalid_argument("unknown polytope preset '" + name + "'");
  }

 private:
  static PolytopeSpec preset(const char* name, int r, Domain d, bool one_group) {
    detail::require(r >= 1, "polytope: dimension must be positive");
    PolytopeSpec p{name, std::vector<Domain>(static_cast<std::size_t>(r), d), {}};
    if (one_group) {
      std::vector<int> all(static_cast<std::size_t>(r));
      for (int i = 0; i < r; ++i) all[static_cast<std::size_t>(i)] = i;
      p.l1_groups.push_back(std::move(all));
    }
    return p;
  }
};

/// Max constraint violation of `s` (0 when feasible).
inline double constraint_violation(const PolytopeSpec& p, const Vector& s) {
  detail::require(s.size() == p.dim(), "polytope: dimension mismatch");
  double worst = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double lo = p.domains[static_cast<std::size_t>(i)] == Domain::Signed ? -1.0 : 0.0;
    worst = std::max({worst, lo - s(i), s(i) - 1.0});
  }
  for (const auto& g : p.l1_groups) {
    double norm = 0.0;
    for (int i : g) norm += std::abs(s(i));
    worst = std::max(worst, norm - 1.0);
  }
  return worst;
}

inline bool contains(const PolytopeSpec& p, const Vector& s, double tol = 1e-9) {
  return constraint_violation(p, s) <= tol;
}

/// Coordinate-wise clamp to [-1,1] (signed) or [0,1] (nonneg).
inline Vector project_box(const Vector& v, const std::vector<Domain>& domains) {
  detail::require(static_cast<std::size_t>(v.size()) == domains.size(),
                  "project_box: dimension mismatch");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double lo = domains[static_cast<std::size_t>(i)] == Domain::Signed ? -1.0 : 0.0;
    out(i) = std::clamp(v(i), lo, 1.0);
  }
  return out;
}

/// Euclidean projection onto {x : ||x||_1 <= radius} by soft thresholding,
/// with the threshold found from sorted cumulative sums of |v|.
inline Vector project_l1_group(const Vector& v, double radius = 1.0) {
  detail::require(radius > 0.0, "project_l1_group: radius must be positive");
  const Vector a = v.cwiseAbs();
  if (a.sum() <= radius) return v;

  std::vector<double> u(a.data(), a.data() + a.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] > t) theta = t;
  }
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(a(i) - theta, 0.0);
    out(i) = v(i) < 0.0 ? -mag : mag;
  }
  return out;
}

/// Projection onto one group constraint set: the group's l1 ball intersected
/// with the nonnegativity of its nonneg coordinates.  Coordinates outside
/// the group are untouched.  The box upper bounds inside the group are
/// implied by the l1 constraint.
inline void project_group_inplace(const PolytopeSpec& p, const std::vector<int>& group,
                                  Vector& x) {
  Vector sub(static_cast<Index>(group.size()));
  for (std::size_t k = 0; k < group.size(); ++k) {
    const int i = group[k];
    const double val = x(i);
    sub(static_cast<Index>(k)) =
        p.domains[static_cast<std::size_t>(i)] == Domain::Nonneg ? std::max(val, 0.0) : val;
  }
  const Vector proj = project_l1_group(sub, 1.0);
  for (std::size_t k = 0; k < group.size(); ++k) x(group[k]) = proj(static_cast<Index>(k));
}

struct ProjectionOptions {
  int max_iter = 200;
  double tol = 1e-10;
  double feasibility_tol = 1e-9;
};

struct ProjectionReport {
  Vector point;
  int iterations = 0;
  double residual = 0.0;  // max constraint violation of `point`
  bool converged = true;
};

namespace detail {

inline Vector project_exact(const PolytopeSpec& p, const Vector& v) {
  Vector x = project_box(v, p.domains);
  // Box clamping commutes with the group step on grouped coordinates: the
  // group step only shrinks magnitudes and keeps nonneg coordinates >= 0.
  for (const auto& g : p.l1_groups) {
    for (int i : g) x(i) = v(i);
    project_group_inplace(p, g, x);
  }
  return x;
}

}  // namespace detail

/// Euclidean projection onto the polytope.
inline ProjectionReport project(const PolytopeSpec& p, const Vector& v,
                                const ProjectionOptions& opt = {}) {
  detail::require(v.size() == p.dim(), "project: dimension mismatch");
  ProjectionReport rep;
  if (p.groups_disjoint()) {
    rep.point = detail::project_exact(p, v);
    rep.iterations = 1;
    rep.residual = constraint_violation(p, rep.point);
    rep.converged = rep.residual <= opt.feasibility_tol;
    return rep;
  }

  // Dykstra over [box, group_1, ..., group_k] with one correction per set.
  const std::size_t nsets = 1 + p.l1_groups.size();
  std::vector<Vector> corr(nsets, Vector::Zero(v.size()));
  Vector x = v;
  rep.converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    // The iterate can stall for a sweep while the corrections still move,
    // so both enter the stopping test.
    double change = 0.0;
    for (std::size_t j = 0; j < nsets; ++j) {
      const Vector y = x + corr[j];
      const Vector prev = x;
      if (j == 0) {
        x = project_box(y, p.domains);
      } else {
        x = y;
        project_group_inplace(p, p.l1_groups[j - 1], x);
      }
      const Vector c = y - x;
      change += (x - prev).squaredNorm() + (c - corr[j]).squaredNorm();
      corr[j] = c;
    }
    rep.iterations = it;
    if (std::sqrt(change) < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.point = std::move(x);
  rep.residual = constraint_violation(p, rep.point);
  rep.converged = rep.converged && rep.residual <= opt.feasibility_tol;
  return rep;
}

/// Projects every column of `s` independently.  Throws ProjectionError if a
/// column ends outside the feasibility tolerance.
inline Matrix project_columns(const PolytopeSpec& p, const Matrix& s,
                              const ProjectionOptions& opt = {}) {
  detail::require(s.rows() == p.dim(), "project_columns: row count differs from polytope dimension");
  Matrix out(s.rows(), s.cols());
  if (p.groups_disjoint()) {
    for (Index j = 0; j < s.cols(); ++j) out.col(j) = detail::project_exact(p, s.col(j));
    return out;
  }
  for (Index j = 0; j < s.cols(); ++j) {
    ProjectionReport rep = project(p, s.col(j), opt);
    if (rep.residual > opt.feasibility_tol) {
      throw ProjectionError("project_columns: column " + std::to_string(j) +
                            " infeasible after projection (residual " +
                            std::to_string(rep.residual) + ")");
    }
    out.col(j) = rep.point;
  }
  return out;
}

inline bool columns_contained(const PolytopeSpec& p, const Matrix& s, double tol = 1e-9) {
  for (Index j = 0; j < s.cols(); ++j) {
    if (!contains(p, s.col(j), tol)) return false;
  }
  return true;
}

/// Point about which each coordinate's reflection maps the polytope onto
/// itself: 0 for signed coordinates and for nonneg coordinates inside an
/// l1 group, 0.5 for free nonneg coordinates (the [0,1] midpoint).
inline Vector reflection_center(const PolytopeSpec& p) {
  Vector c = Vector::Zero(p.dim());
  std::vector<bool> grouped(static_cast<std::size_t>(p.dim()), false);
  for (const auto& g : p.l1_groups) {
    for (int i : g) grouped[static_cast<std::size_t>(i)] = true;
  }
  for (int i = 0; i < p.dim(); ++i) {
    if (p.domains[static_cast<std::size_t>(i)] == Domain::Nonneg &&
        !grouped[static_cast<std::size_t>(i)]) {
      c(i) = 0.5;
    }
  }
  return c;
}

}  // namespace ldinfomax
