#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "evenproj/error.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace evenproj {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Exact rational with a positive denominator; used for indices that may be
/// half-integers.
struct Rational {
  long num = 0;
  long den = 1;

  Rational() = default;
  Rational(long n, long d = 1) : num(n), den(d) {
    if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
};

/// Truncated Fourier basis on S^1 tensored with a fiber: mode n in [-N, N],
/// fiber slot i in [0, fiber). Storage is mode-major.
struct ModeLayout {
  int N = 0;
  int fiber = 1;

  int modes() const { return 2 * N + 1; }
  int dim() const { return modes() * fiber; }
  int index(int n, int i) const { return (n + N) * fiber + i; }
  int mode_of(int idx) const { return idx / fiber - N; }
  int slot_of(int idx) const { return idx % fiber; }

  /// Indices whose mode satisfies |n| <= window.
  std::vector<int> window(int w) const {
    std::vector<int> out;
    for (int n = -std::min(w, N); n <= std::min(w, N); ++n)
      for (int i = 0; i < fiber; ++i) out.push_back(index(n, i));
    return out;
  }
};

inline CMatrix select_columns(const CMatrix& m, const std::vector<int>& cols) {
  CMatrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return out;
}

namespace detail {

/// Singular values (descending) and optionally the thin left factor through
/// LAPACK zgesvd. Eigen's BDCSVD is avoided: in 3.4 it returns wrong bases on
/// the heavily repeated spectra of projection blocks.
inline RVector lapack_svd(const CMatrix& m, CMatrix* u = nullptr) {
  CMatrix a = m;
  const lapack_int rows = static_cast<lapack_int>(m.rows()), cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  RVector s(k);
  std::vector<double> superb(static_cast<size_t>(std::max<lapack_int>(k, 2)));
  if (u) u->resize(rows, k);
  std::complex<double> dummy;
  const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, u ? 'S' : 'N', 'N', rows, cols, a.data(), rows, s.data(),
                                         u ? u->data() : &dummy, rows, &dummy, 1, superb.data());
  if (info != 0) throw Error(ErrorKind::IllConditioned, "zgesvd did not converge (info " + std::to_string(info) + ")");
  return s;
}

}  // namespace detail

inline RVector singular_values(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return RVector(0);
  return detail::lapack_svd(m);
}

struct RankInfo {
  int rank = 0;
  int zero_count = 0;      // number of columns minus rank
  double largest_zero = 0.0;
  double smallest_nonzero = 0.0;
};

/// Numerical rank with the artifact-wide convention: singular values below
/// zero_tol * max(1, sigma_max) are zero, and the zero and nonzero groups must
/// be separated by a factor >= gap (measured against the threshold itself when
/// one group is empty).
inline RankInfo numerical_rank(const CMatrix& m, double zero_tol = 1e-8, double gap = 1e3) {
  RankInfo info;
  const auto cols = static_cast<int>(m.cols());
  RVector sv = singular_values(m);
  const int k = static_cast<int>(sv.size());
  const double smax = k > 0 ? sv(0) : 0.0;
  const double thresh = zero_tol * std::max(1.0, smax);
  int rank = 0;
  while (rank < k && sv(rank) >= thresh) ++rank;
  info.rank = rank;
  info.zero_count = cols - rank;
  info.largest_zero = rank < k ? sv(rank) : 0.0;
  info.smallest_nonzero = rank > 0 ? sv(rank - 1) : 0.0;
  if (rank > 0) {
    const double floor = std::max(info.largest_zero, thresh);
    if (info.smallest_nonzero < gap * floor) {
      std::ostringstream os;
      os << "no " << gap << " gap between zero and nonzero singular values (" << info.largest_zero << " vs "
         << info.smallest_nonzero << ")";
      throw Error(ErrorKind::IllConditioned, os.str());
    }
  }
  return info;
}

/// Orthonormal basis of the column space of m, keeping directions whose
/// singular value exceeds rel_tol * sigma_max. Not a rank decision: any kept
/// direction lies exactly in the column space.
inline CMatrix range_basis(const CMatrix& m, double rel_tol = 1e-4) {
  if (m.cols() == 0 || m.rows() == 0) return CMatrix(m.rows(), 0);
  CMatrix u;
  const RVector sv = detail::lapack_svd(m, &u);
  if (sv.size() == 0 || sv(0) == 0.0) return CMatrix(m.rows(), 0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > rel_tol * sv(0)) ++r;
  return u.leftCols(r);
}

/// Orthonormal basis of the column space with a hard rank decision (uses
/// numerical_rank).
inline CMatrix column_space(const CMatrix& m, double zero_tol = 1e-8) {
  if (m.cols() == 0 || m.rows() == 0) return CMatrix(m.rows(), 0);
  const int r = numerical_rank(m, zero_tol).rank;
  CMatrix u;
  detail::lapack_svd(m, &u);
  return u.leftCols(r);
}

/// Largest principal-angle sine between two column spaces given by
/// orthonormal bases; 1 when dimensions differ.
inline double subspace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0 || a.rows() == 0) return 0.0;
  const CMatrix resid = b - a * (a.adjoint() * b);
  return singular_values(resid).maxCoeff();
}

/// Matrix sign function by scaled Newton iteration; eigenvalues must stay off
/// the imaginary axis.
inline CMatrix matrix_sign(const CMatrix& m) {
  CMatrix x = m;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<CMatrix> lu(x);
    const CMatrix xinv = lu.inverse();
    const double d = std::abs(lu.determinant());
    double scale = 1.0;
    if (d > 0.0 && std::isfinite(d)) scale = std::pow(d, -1.0 / static_cast<double>(x.rows()));
    const CMatrix next = 0.5 * (scale * x + xinv / scale);
    const double delta = (next - x).norm();
    x = next;
    if (delta <= 1e-14 * std::max(1.0, x.norm())) break;
  }
  return x;
}

/// Projector onto the invariant subspace of eigenvalues with positive real part.
inline CMatrix positive_real_projector(const CMatrix& m) {
  if (m.rows() == 0) return m;
  const CMatrix s = matrix_sign(m);
  return 0.5 * (CMatrix::Identity(m.rows(), m.cols()) + s);
}

/// Dimension of kernel and cokernel of a linear map restricted to subspaces.
struct KerCoker {
  int ker = 0;
  int coker = 0;
  int index() const { return ker - coker; }
};

/// Fredholm index of L : Im P1 -> Im P2 from finite sections.
///
/// Kernel candidates are drawn from Im P1 restricted to domain_window columns
/// and L is applied with its full output rows; cokernel candidates are drawn
/// from Im P2 restricted to codomain_window columns and tested with P1^* L^*.
/// Neither side truncates the image of the tested vectors, so the finite
/// section introduces no spurious kernel at the truncation edge as long as
/// the window plus the accumulated band width stays inside the section.
inline KerCoker index_in_subspaces(const CMatrix& L, const CMatrix& P1, const CMatrix& P2,
                                   const std::vector<int>& domain_window,
                                   const std::vector<int>& codomain_window) {
  KerCoker kc;
  const CMatrix q1 = range_basis(select_columns(P1, domain_window));
  if (q1.cols() > 0) kc.ker = numerical_rank(P2 * (L * q1)).zero_count;
  const CMatrix q2 = range_basis(select_columns(P2, codomain_window));
  if (q2.cols() > 0) kc.coker = numerical_rank(P1.adjoint() * (L.adjoint() * q2)).zero_count;
  return kc;
}

}  // namespace evenproj
