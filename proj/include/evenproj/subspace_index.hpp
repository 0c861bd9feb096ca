#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evenproj/projections.hpp"

namespace evenproj {

/// Operator D acting from Im P1 to Im P2.
struct SubspaceTriple {
  TruncatedOperator D;  // symbol required
  ProjectionOperator P1;
  ProjectionOperator P2;

  int N() const { return D.N(); }
  double compatibility_defect() const { return (P2.matrix() * D.matrix * P1.matrix() - D.matrix * P1.matrix()).norm(); }

  void validate() const {
    if (!D.symbol) throw Error(ErrorKind::InvalidArgument, "triple operator carries no symbol");
    if (!P1.even || !P2.even) throw Error(ErrorKind::NotEven, "triple projections must be even");
    const double defect = compatibility_defect();
    if (defect > 1e-8 * std::max(1.0, D.matrix.norm()))
      throw Error(ErrorKind::InvalidArgument, "P2 D P1 != D P1 (defect " + std::to_string(defect) + ")");
  }
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Recipe for a projection that can be realized at any truncation level.
struct ProjectionSpec {
  enum class Kind { Bundle, Finite, Spectral };
  Kind kind = Kind::Bundle;
  Loop p = Loop::identity(1);   // Bundle
  int fiber = 1;                // Finite / Spectral
  int lo = 0, hi = -1;          // Finite: modes lo..hi
  std::vector<Poly> q;          // Spectral: nonneg projection of diag(q_i(n))
  std::vector<std::pair<int, int>> add, remove;  // finite-rank changes (mode, slot)

  static ProjectionSpec bundle(Loop l) {
    ProjectionSpec s;
    s.kind = Kind::Bundle;
    s.fiber = l.rows();
    s.p = std::move(l);
    return s;
  }
  static ProjectionSpec finite(int fiber, int lo, int hi) {
    ProjectionSpec s;
    s.kind = Kind::Finite;
    s.fiber = fiber;
    s.lo = lo;
    s.hi = hi;
    return s;
  }
  static ProjectionSpec spectral(std::vector<Poly> q) {
    ProjectionSpec s;
    s.kind = Kind::Spectral;
    s.fiber = static_cast<int>(q.size());
    s.q = std::move(q);
    return s;
  }

  ProjectionOperator build(int N) const {
    ProjectionOperator out;
    switch (kind) {
      case Kind::Bundle: out = bundle_projection(p, N); break;
      case Kind::Finite: out = finite_projection(N, fiber, lo, hi); break;
      case Kind::Spectral: out = nonneg_spectral_projection(fourier_diagonal(N, q)); break;
    }
    if (!add.empty() || !remove.empty()) out = orthogonalize(out);
    for (auto [n, i] : remove) out = remove_mode(out, n, i);
    for (auto [n, i] : add) out = add_mode(out, n, i);
    return out;
  }
};

/// D = P2 Op(a) P1 at a chosen truncation.
struct TripleSpec {
  std::string name;
  MatrixSymbol a;
  ProjectionSpec p1;
  ProjectionSpec p2;

  SubspaceTriple build(int N) const {
    SubspaceTriple t;
    t.P1 = p1.build(N);
    t.P2 = p2.build(N);
    TruncatedOperator op = quantize_circle(a, N);
    t.D = op;
    t.D.matrix = t.P2.matrix() * op.matrix * t.P1.matrix();
    t.D.provenance = name.empty() ? "triple" : name;
    return t;
  }
};

// ---------------------------------------------------------------------------
// Ellipticity
// ---------------------------------------------------------------------------

/// Orthonormal basis of Im p for a (possibly oblique) projection matrix p.
inline CMatrix frame_of(const CMatrix& p) { return column_space(p, 1e-6); }

struct SubspaceEllipticity {
  bool elliptic = false;
  double min_singular = 0.0;
  double worst_x = 0.0;
  int worst_ray = +1;
  std::string failure;
};

/// Restricted symbol F2(x)^* a_(+-)(x) F1(x) must be square with smallest
/// singular value above 1e-8 at every grid point.
inline SubspaceEllipticity check_subspace_ellipticity(const SubspaceTriple& t) {
  t.validate();
  SubspaceEllipticity rep;
  rep.min_singular = std::numeric_limits<double>::infinity();
  const MatrixSymbol& a = *t.D.symbol;
  const int grid = std::max({512, 8 * a.support(), 8 * t.P1.symbol.support(), 8 * t.P2.symbol.support()});
  for (int sign : {+1, -1})
    for (int j = 0; j < grid; ++j) {
      const double x = 2.0 * kPi * j / grid;
      const CMatrix f1 = frame_of(t.P1.symbol.ray(sign)(x));
      const CMatrix f2 = frame_of(t.P2.symbol.ray(sign)(x));
      if (f1.cols() != f2.cols()) {
        rep.failure = "not elliptic: rank defect (" + std::to_string(f1.cols()) + " vs " + std::to_string(f2.cols()) +
                      ") at x = " + std::to_string(x);
        rep.worst_x = x;
        rep.worst_ray = sign;
        rep.min_singular = 0.0;
        return rep;
      }
      if (f1.cols() == 0) continue;
      const RVector sv = singular_values(f2.adjoint() * a.ray(sign)(x) * f1);
      const double smin = sv(sv.size() - 1);
      if (smin < rep.min_singular) {
        rep.min_singular = smin;
        rep.worst_x = x;
        rep.worst_ray = sign;
      }
    }
  if (!std::isfinite(rep.min_singular)) rep.min_singular = 1.0;  // zero-rank symbols restrict trivially
  rep.elliptic = rep.min_singular > 1e-8;
  if (!rep.elliptic) rep.failure = "not elliptic: degenerate restriction at x = " + std::to_string(rep.worst_x);
  return rep;
}

// ---------------------------------------------------------------------------
// Indices
// ---------------------------------------------------------------------------

inline KerCoker triple_kernel_cokernel(const SubspaceTriple& t) {
  const auto w = t.D.layout.window(default_window(t.N()));
  return index_in_subspaces(t.D.matrix, t.P1.matrix(), t.P2.matrix(), w, w);
}

/// Analytic index at a single truncation level.
inline int analytic_index(const SubspaceTriple& t) {
  auto ell = check_subspace_ellipticity(t);
  if (!ell.elliptic) throw Error(ErrorKind::NotElliptic, ell.failure);
  return triple_kernel_cokernel(t).index();
}

/// Analytic index stabilized across the given truncation levels.
inline StabilizedIndex analytic_index(const TripleSpec& spec, const std::vector<int>& levels) {
  StabilizedIndex out;
  out.levels = levels;
  for (int N : levels) out.values.push_back(analytic_index(spec.build(N)));
  for (int v : out.values)
    if (v != out.values.front()) {
      std::string msg = "analytic index";
      for (size_t i = 0; i < levels.size(); ++i)
        msg += " N=" + std::to_string(levels[i]) + ":" + std::to_string(out.values[i]);
      throw Error(ErrorKind::TruncationUnstable, msg);
    }
  out.value = out.values.empty() ? 0 : out.values.front();
  return out;
}

/// det of the restricted symbol F2^* a F1 at x on one ray (1 for rank 0).
inline cplx restricted_det(const SubspaceTriple& t, int sign, double x) {
  const CMatrix f1 = frame_of(t.P1.symbol.ray(sign)(x));
  const CMatrix f2 = frame_of(t.P2.symbol.ray(sign)(x));
  if (f1.cols() != f2.cols()) throw Error(ErrorKind::NotElliptic, "rank defect");
  if (f1.cols() == 0) return 1.0;
  return (f2.adjoint() * t.D.symbol->ray(sign)(x) * f1).determinant();
}

/// ind_t = 1/2 (wind det b_- - wind det b_+), b(x, xi) = a(x,-xi)^{-1} a(x,xi)
/// on Im p1 extended by the identity on Im(1 - p1). Frames cancel in
/// det b_+ = det(F2^* a_+ F1) / det(F2^* a_- F1), so any pointwise frame works.
inline Rational topological_index_even(const SubspaceTriple& t) {
  if (!t.P1.even || !t.P2.even) throw Error(ErrorKind::NotEven, "ind_t needs even projections");
  auto ell = check_subspace_ellipticity(t);
  if (!ell.elliptic) throw Error(ErrorKind::NotElliptic, ell.failure);
  const int grid = std::max(1024, 8 * std::max(t.D.symbol->support(), std::max(t.P1.symbol.support(), t.P2.symbol.support())));
  const int wind_bplus = winding_number(
      [&](double x) { return restricted_det(t, +1, x) / restricted_det(t, -1, x); }, grid);
  const int wind_bminus = winding_number(
      [&](double x) { return restricted_det(t, -1, x) / restricted_det(t, +1, x); }, grid);
  return Rational(wind_bminus - wind_bplus, 2);
}

struct Theorem2Report {
  std::vector<int> levels;
  std::vector<int> ind_a_values;
  int ind_a = 0;
  Rational ind_t;
  Rational d;
  Rational d1, d2;
  bool holds = false;
};

/// ind_a = ind_t + d(P1) - d(P2), each side computed independently.
inline Theorem2Report verify_theorem2(const TripleSpec& spec, const std::vector<int>& levels) {
  Theorem2Report rep;
  auto ia = analytic_index(spec, levels);
  rep.levels = levels;
  rep.ind_a_values = ia.values;
  rep.ind_a = ia.value;
  const SubspaceTriple t = spec.build(levels.back());
  rep.ind_t = topological_index_even(t);
  rep.d1 = d_dimension(t.P1);
  rep.d2 = d_dimension(t.P2);
  rep.d = rep.d1 - rep.d2;
  rep.holds = Rational(rep.ind_a) == rep.ind_t + rep.d;
  return rep;
}

}  // namespace evenproj
