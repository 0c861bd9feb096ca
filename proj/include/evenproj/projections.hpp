#pragma once

#include <Eigen/Eigenvalues>

#include <optional>
#include <string>
#include <vector>

#include "evenproj/symcalc.hpp"

namespace evenproj {

/// chi([E]) = r * rank(E). On S^1 the base K-group is detected by rank, so a
/// single scalar describes every normalization.
struct Normalization {
  Rational r{0};
  static Normalization trivial() { return {}; }
};

struct ProjectionOperator {
  TruncatedOperator op;
  MatrixSymbol symbol;  // projection-valued loops with the ranges of the principal symbol
  bool even = false;
  bool orthogonal = false;

  const CMatrix& matrix() const { return op.matrix; }
  const ModeLayout& layout() const { return op.layout; }
  int N() const { return op.N(); }
  int fiber() const { return op.fiber(); }
};

inline double idempotency_defect(const CMatrix& p) { return (p * p - p).norm(); }

inline void certify_idempotent(const CMatrix& p) {
  const double defect = idempotency_defect(p);
  if (defect > 1e-9 * (1.0 + p.norm()))
    throw Error(ErrorKind::NotIdempotent, "||P^2 - P|| = " + std::to_string(defect));
}

/// Maximum of |p(x)^2 - p(x)| over the check grid on both rays.
inline double loop_idempotency_defect(const MatrixSymbol& s) {
  const int grid = ellipticity_grid(s);
  double worst = 0.0;
  for (int sign : {+1, -1})
    for (int j = 0; j < grid; ++j) {
      const CMatrix v = s.ray(sign)(2.0 * kPi * j / grid);
      worst = std::max(worst, (v * v - v).norm());
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Sum of the eigenprojections of Pi for eigenvalues with |lambda - 1| < eps.
inline ProjectionOperator riesz_projection(const TruncatedOperator& pi, double eps = 0.5,
                                           std::optional<MatrixSymbol> symbol = std::nullopt) {
  const auto n = pi.matrix.rows();
  auto check_annulus = [&](cplx lambda) {
    const double r = std::abs(lambda - 1.0);
    if (r >= 0.9 * eps && r <= 1.1 * eps) {
      std::ostringstream os;
      os << "eigenvalue " << lambda.real() << (lambda.imag() < 0 ? "" : "+") << lambda.imag() << "i at |lambda-1| = " << r
         << " (eps = " << eps << ")";
      throw Error(ErrorKind::SpectralGapViolation, os.str());
    }
  };
  ProjectionOperator out;
  out.op.layout = pi.layout;
  out.op.provenance = "riesz(" + pi.provenance + ")";
  if (pi.hermitian) {
    pi.certify_hermitian();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pi.matrix);
    const CMatrix& v = es.eigenvectors();
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
      check_annulus(es.eigenvalues()(i));
      if (std::abs(es.eigenvalues()(i) - 1.0) < eps) keep.push_back(static_cast<int>(i));
    }
    const CMatrix q = select_columns(v, keep);
    out.op.matrix = q * q.adjoint();
    out.op.hermitian = true;
    out.orthogonal = true;
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(pi.matrix);
    const CMatrix& v = es.eigenvectors();
    const CMatrix vinv = v.partialPivLu().inverse();
    CMatrix sel = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      check_annulus(es.eigenvalues()(i));
      if (std::abs(es.eigenvalues()(i) - 1.0) < eps) sel += v.col(i) * vinv.row(i);
    }
    out.op.matrix = sel;
    out.orthogonal = (sel - sel.adjoint()).norm() <= 1e-10 * std::max(1.0, sel.norm());
    out.op.hermitian = out.orthogonal;
  }
  certify_idempotent(out.op.matrix);
  if (!symbol && pi.symbol) symbol = pi.symbol;
  if (symbol) {
    out.symbol = *symbol;
    out.even = symbol->is_even();
  } else {
    out.symbol = MatrixSymbol::even(Loop::zero(pi.fiber(), pi.fiber()));
    out.even = false;
  }
  out.op.symbol = out.symbol;
  return out;
}

/// Multiplication by a projection-valued loop, compressed to |n| <= N and
/// repaired to an exact idempotent by a Riesz projection. The radius starts at
/// 0.5 and moves to the next candidate when an edge eigenvalue falls in the
/// forbidden annulus.
inline ProjectionOperator bundle_projection(const Loop& p, int N) {
  const MatrixSymbol s = MatrixSymbol::even(p);
  const double defect = loop_idempotency_defect(s);
  if (defect > 1e-9) throw Error(ErrorKind::NotIdempotent, "loop p(x)^2 != p(x), defect " + std::to_string(defect));
  TruncatedOperator mp;
  mp.layout = {N, p.rows()};
  if (N < min_truncation(s)) throw Error(ErrorKind::TruncationTooSmall, "N below 2 * support");
  mp.matrix = multiplication_matrix(p, mp.layout);
  mp.provenance = "bundle";
  mp.symbol = s;
  mp.hermitian = (mp.matrix - mp.matrix.adjoint()).norm() <= 1e-10 * std::max(1.0, mp.matrix.norm());
  std::optional<Error> last;
  for (double eps : {0.5, 0.4, 0.6, 0.3, 0.7}) {
    try {
      ProjectionOperator out = riesz_projection(mp, eps, s);
      out.even = true;
      out.op.provenance = "bundle_projection";
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SpectralGapViolation) throw;
      last = e;
    }
  }
  throw *last;
}

/// Constant orthogonal projection onto the given fiber coordinates.
inline ProjectionOperator coordinate_projection(const std::vector<int>& slots, int fiber, int N) {
  CMatrix p = CMatrix::Zero(fiber, fiber);
  for (int s : slots) p(s, s) = 1.0;
  return bundle_projection(Loop::constant(p), N);
}

/// Orthogonal projection onto the modes satisfying pred(n) (all fiber slots).
template <class Pred>
ProjectionOperator mode_projection(int N, int fiber, Pred pred, std::optional<MatrixSymbol> symbol = std::nullopt,
                                   const std::string& tag = "mode_projection") {
  ProjectionOperator out;
  out.op.layout = {N, fiber};
  out.op.matrix = CMatrix::Zero(out.op.layout.dim(), out.op.layout.dim());
  for (int n = -N; n <= N; ++n)
    if (pred(n))
      for (int i = 0; i < fiber; ++i) out.op.matrix(out.op.layout.index(n, i), out.op.layout.index(n, i)) = 1.0;
  out.op.provenance = tag;
  out.op.hermitian = true;
  out.orthogonal = true;
  out.symbol = symbol ? *symbol : MatrixSymbol::even(Loop::zero(fiber, fiber));
  out.even = out.symbol.is_even();
  out.op.symbol = out.symbol;
  return out;
}

/// Hardy projection onto n >= 0; its symbol is 1 on xi > 0 and 0 on xi < 0.
inline ProjectionOperator hardy_projection(int N, int fiber = 1) {
  MatrixSymbol s(Loop::identity(fiber), Loop::zero(fiber, fiber));
  return mode_projection(N, fiber, [](int n) { return n >= 0; }, s, "hardy");
}

/// Finite-rank projection onto modes in [lo, hi]; zero symbol.
inline ProjectionOperator finite_projection(int N, int fiber, int lo, int hi) {
  return mode_projection(N, fiber, [=](int n) { return n >= lo && n <= hi; }, std::nullopt, "finite");
}

/// Orthogonal projection with the same range: eigenvectors of P P^* with
/// eigenvalue above 1/2 (nonzero singular values of an idempotent are >= 1).
inline ProjectionOperator orthogonalize(const ProjectionOperator& p) {
  if (p.orthogonal) return p;
  certify_idempotent(p.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(p.matrix() * p.matrix().adjoint());
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) keep.push_back(static_cast<int>(i));
  const CMatrix q = select_columns(es.eigenvectors(), keep);
  ProjectionOperator out = p;
  out.op.matrix = q * q.adjoint();
  out.op.hermitian = true;
  out.op.provenance = "orthogonalize(" + p.op.provenance + ")";
  out.orthogonal = true;
  return out;
}

/// Orthonormal basis of the range of a projection.
inline CMatrix projection_range(const CMatrix& p) { return column_space(p); }

// ---------------------------------------------------------------------------
// Finite-rank modifications (orthogonal projections only)
// ---------------------------------------------------------------------------

/// P + u u^* with u the normalized component of e_{n,i} orthogonal to Im P.
inline ProjectionOperator add_mode(const ProjectionOperator& p, int n, int slot) {
  if (!p.orthogonal) throw Error(ErrorKind::InvalidArgument, "add_mode needs an orthogonal projection");
  const auto& lay = p.layout();
  CVector e = CVector::Zero(lay.dim());
  e(lay.index(n, slot)) = 1.0;
  CVector u = e - p.matrix() * e;
  if (u.norm() < 1e-6) throw Error(ErrorKind::InvalidArgument, "mode already in the range");
  u.normalize();
  ProjectionOperator out = p;
  out.op.matrix += u * u.adjoint();
  out.op.provenance += "+e" + std::to_string(n);
  return out;
}

/// P - u u^* with u the normalized projection of e_{n,i} onto Im P.
inline ProjectionOperator remove_mode(const ProjectionOperator& p, int n, int slot) {
  if (!p.orthogonal) throw Error(ErrorKind::InvalidArgument, "remove_mode needs an orthogonal projection");
  const auto& lay = p.layout();
  CVector e = CVector::Zero(lay.dim());
  e(lay.index(n, slot)) = 1.0;
  CVector u = p.matrix() * e;
  if (u.norm() < 1e-6) throw Error(ErrorKind::InvalidArgument, "mode not in the range");
  u.normalize();
  ProjectionOperator out = p;
  out.op.matrix -= u * u.adjoint();
  out.op.provenance += "-e" + std::to_string(n);
  return out;
}

/// Block direct sum P (+) P' with P' acting on an extra fiber.
inline ProjectionOperator direct_sum(const ProjectionOperator& a, const ProjectionOperator& b) {
  if (a.N() != b.N()) throw Error(ErrorKind::InvalidArgument, "direct_sum needs equal N");
  const int fa = a.fiber(), fb = b.fiber(), N = a.N();
  ProjectionOperator out;
  out.op.layout = {N, fa + fb};
  const auto& lo = out.op.layout;
  out.op.matrix = CMatrix::Zero(lo.dim(), lo.dim());
  auto place = [&](const ProjectionOperator& src, int offset) {
    const auto& ls = src.layout();
    for (int c = 0; c < ls.dim(); ++c)
      for (int r = 0; r < ls.dim(); ++r) {
        const cplx v = src.matrix()(r, c);
        if (v == 0.0) continue;
        out.op.matrix(lo.index(ls.mode_of(r), ls.slot_of(r) + offset), lo.index(ls.mode_of(c), ls.slot_of(c) + offset)) = v;
      }
  };
  place(a, 0);
  place(b, fa);
  auto blockdiag = [&](const Loop& x, const Loop& y) {
    Loop l(fa + fb);
    std::map<int, CMatrix> all;
    for (auto& [k, m] : x.coeffs()) all[k] = CMatrix::Zero(fa + fb, fa + fb), all[k].topLeftCorner(fa, fa) = m;
    for (auto& [k, m] : y.coeffs()) {
      if (!all.count(k)) all[k] = CMatrix::Zero(fa + fb, fa + fb);
      all[k].bottomRightCorner(fb, fb) = m;
    }
    for (auto& [k, m] : all) l.set(k, m);
    return l;
  };
  out.symbol = MatrixSymbol(blockdiag(a.symbol.a_plus, b.symbol.a_plus), blockdiag(a.symbol.a_minus, b.symbol.a_minus));
  out.even = a.even && b.even;
  out.orthogonal = a.orthogonal && b.orthogonal;
  out.op.hermitian = out.orthogonal;
  out.op.symbol = out.symbol;
  out.op.provenance = "direct_sum";
  return out;
}

// ---------------------------------------------------------------------------
// Relative index and d
// ---------------------------------------------------------------------------

/// Largest singular value of (P - Q) on the columns with N/4 <= |n| <= N/2.
inline double compactness_defect(const CMatrix& p, const CMatrix& q, const ModeLayout& lay) {
  std::vector<int> band;
  const int lo = lay.N / 4, hi = default_window(lay.N);
  for (int n = -hi; n <= hi; ++n)
    if (std::abs(n) >= lo)
      for (int i = 0; i < lay.fiber; ++i) band.push_back(lay.index(n, i));
  if (band.empty()) return 0.0;
  const RVector sv = singular_values(select_columns(p - q, band));
  return sv.size() ? sv(0) : 0.0;
}

/// ind(P, Q) = index of Q : Im P -> Im Q.
inline int relative_index(const ProjectionOperator& p, const ProjectionOperator& q) {
  if (p.layout().N != q.layout().N || p.fiber() != q.fiber())
    throw Error(ErrorKind::InvalidArgument, "projections live on different truncations");
  const double defect = compactness_defect(p.matrix(), q.matrix(), p.layout());
  if (defect > 1e-3)
    throw Error(ErrorKind::NonCompactDifference, "||P - Q|| on the mode band is " + std::to_string(defect));
  if (defect > 1e-6)
    throw Error(ErrorKind::IllConditioned, "P - Q decays too slowly for this N (" + std::to_string(defect) + ")");
  const auto w = p.layout().window(default_window(p.N()));
  return index_in_subspaces(q.matrix(), p.matrix(), q.matrix(), w, w).index();
}

/// Rank of the projection-valued loop (constant in x).
inline int loop_rank(const Loop& p) { return static_cast<int>(std::lround(p(0.0).trace().real())); }

/// d(P) = ind(P, bundle_projection(p)) + r * rank(p) where p is the principal
/// symbol of the even projection P.
inline Rational d_dimension(const ProjectionOperator& p, Normalization chi = Normalization::trivial()) {
  if (!p.even) throw Error(ErrorKind::NotEven, "d is defined for even projections only");
  const double defect = loop_idempotency_defect(p.symbol);
  if (defect > 1e-9) throw Error(ErrorKind::NotIdempotent, "symbol of P is not a projection, defect " + std::to_string(defect));
  const Loop& sym = p.symbol.a_plus;
  const ProjectionOperator ref = bundle_projection(sym, p.N());
  const int rk = loop_rank(sym);
  return Rational(relative_index(p, ref)) + Rational(chi.r.num * rk, chi.r.den);
}

// ---------------------------------------------------------------------------
// Spectral projections
// ---------------------------------------------------------------------------

/// Projection-valued loop p = (1 + s)/2 when the symbol s is an involution on
/// the grid, or the constant positive-part projection when s is constant
/// hermitian.
inline std::optional<MatrixSymbol> positive_part_symbol(const MatrixSymbol& s) {
  auto ray = [&](const Loop& l) -> std::optional<Loop> {
    const int n = l.rows();
    if (l.is_constant()) {
      const CMatrix c = l.coeff(0);
      if ((c - c.adjoint()).norm() > 1e-10) return std::nullopt;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
      std::vector<int> keep;
      for (int i = 0; i < n; ++i)
        if (es.eigenvalues()(i) >= 0.0) keep.push_back(i);
      const CMatrix q = select_columns(es.eigenvectors(), keep);
      return Loop::constant(q * q.adjoint());
    }
    const Loop sq = l * l;
    if (distance(sq, Loop::identity(n)) > 1e-10) return std::nullopt;
    return 0.5 * (Loop::identity(n) + l);
  };
  auto plus = ray(s.a_plus);
  auto minus = ray(s.a_minus);
  if (!plus || !minus) return std::nullopt;
  return MatrixSymbol(*plus, *minus);
}

/// Orthogonal projection onto eigenvalues >= 0 of a hermitian operator
/// (kernel |lambda| <= 1e-12 included).
inline ProjectionOperator nonneg_spectral_projection(const TruncatedOperator& a) {
  if (!a.hermitian) throw Error(ErrorKind::InvalidArgument, "operator is not flagged hermitian");
  a.certify_hermitian();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix);
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    const double al = std::abs(l);
    if (al > 1e-12 && al < 1e-8)
      throw Error(ErrorKind::SpectralMarginTooSmall, "eigenvalue " + std::to_string(l));
    if (l >= 0.0 || al <= 1e-12) keep.push_back(static_cast<int>(i));
  }
  const CMatrix q = select_columns(es.eigenvectors(), keep);
  ProjectionOperator out;
  out.op.layout = a.layout;
  out.op.matrix = q * q.adjoint();
  out.op.hermitian = true;
  out.op.provenance = "nonneg(" + a.provenance + ")";
  out.orthogonal = true;
  std::optional<MatrixSymbol> sym;
  if (a.symbol) sym = positive_part_symbol(*a.symbol);
  if (sym) {
    out.symbol = *sym;
    out.even = sym->is_even();
  } else {
    out.symbol = MatrixSymbol::even(Loop::zero(a.fiber(), a.fiber()));
    out.even = false;
  }
  out.op.symbol = out.symbol;
  return out;
}

}  // namespace evenproj
