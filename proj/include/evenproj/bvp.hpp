#pragma once

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "evenproj/spectral.hpp"

namespace evenproj {

// ---------------------------------------------------------------------------
// Normal symbols: polynomials in tau (tau <-> -i d/dt) at |xi'| = 1
// ---------------------------------------------------------------------------

struct NormalSymbol {
  std::vector<MatrixSymbol> d;  // d[k] multiplies tau^k

  int order() const { return static_cast<int>(d.size()) - 1; }
  int n() const { return d.empty() ? 0 : d.front().n(); }
  int support() const {
    int s = 0;
    for (auto& c : d) s = std::max(s, c.support());
    return s;
  }
  bool x_independent() const { return support() == 0; }
  bool ray_even() const {
    for (auto& c : d)
      if (!c.is_even()) return false;
    return true;
  }

  std::vector<CMatrix> at(double x, int sign) const {
    std::vector<CMatrix> out;
    for (auto& c : d) out.push_back(c.ray(sign)(x));
    return out;
  }

  /// d/dt + A  ->  i tau + A, normalized to tau - iA.
  static NormalSymbol dt(const MatrixSymbol& a) {
    NormalSymbol s;
    const Loop one = Loop::identity(a.n());
    s.d.push_back(MatrixSymbol(cplx(0.0, -1.0) * a.a_plus, cplx(0.0, -1.0) * a.a_minus, 0));
    s.d.push_back(MatrixSymbol(one, one, 0));
    return s;
  }

  static NormalSymbol constant(const std::vector<CMatrix>& plus, const std::vector<CMatrix>& minus) {
    NormalSymbol s;
    for (size_t k = 0; k < plus.size(); ++k) s.d.push_back(MatrixSymbol(Loop::constant(plus[k]), Loop::constant(minus[k])));
    return s;
  }
  static NormalSymbol constant(const std::vector<CMatrix>& both) { return constant(both, both); }
};

inline int symbol_grid(int support) { return support == 0 ? 1 : std::max(64, 8 * support); }

// ---------------------------------------------------------------------------
// Cauchy data
// ---------------------------------------------------------------------------

struct CauchyData {
  CMatrix minus;  // orthonormal basis of L^-, jets (u, u', ..., u^(m-1)) stacked jet-major
  CMatrix plus;
  std::vector<cplx> roots;
  double margin = 0.0;  // min |Im tau| over roots
  bool jordan = false;  // root cluster within 1e-6, handled through the invariant subspace
};

/// Companion matrix of the monic polynomial d_m^{-1} D(tau).
inline CMatrix companion(const std::vector<CMatrix>& d) {
  const int m = static_cast<int>(d.size()) - 1;
  const auto n = d.front().rows();
  Eigen::PartialPivLU<CMatrix> lu(d[static_cast<size_t>(m)]);
  if (std::abs(lu.determinant()) < 1e-12) throw Error(ErrorKind::InvalidArgument, "leading coefficient is singular");
  CMatrix c = CMatrix::Zero(m * n, m * n);
  for (int j = 0; j + 1 < m; ++j) c.block(j * n, (j + 1) * n, n, n).setIdentity();
  for (int k = 0; k < m; ++k) c.block((m - 1) * n, k * n, n, n) = -lu.solve(d[static_cast<size_t>(k)]);
  return c;
}

/// L^- spans the jets of solutions e^{i tau t} v with Im tau > 0, i.e. those
/// decaying as t -> +infinity. The stable invariant subspace of the companion
/// matrix is taken through the matrix sign of -iC, which also covers Jordan
/// blocks; jets are then scaled by (i^j) since d/dt = i tau.
inline CauchyData cauchy_data(const std::vector<CMatrix>& d) {
  const int m = static_cast<int>(d.size()) - 1;
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "normal symbol must have order >= 1");
  const auto n = d.front().rows();
  const CMatrix c = companion(d);
  CauchyData out;
  Eigen::ComplexEigenSolver<CMatrix> es(c, false);
  out.margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx r = es.eigenvalues()(i);
    out.roots.push_back(r);
    out.margin = std::min(out.margin, std::abs(r.imag()));
  }
  if (out.margin < 1e-8) {
    std::ostringstream os;
    os << "real root within " << out.margin << " of the axis";
    throw Error(ErrorKind::BoundaryNonelliptic, os.str());
  }
  for (size_t i = 0; i < out.roots.size(); ++i)
    for (size_t j = i + 1; j < out.roots.size(); ++j)
      if (std::abs(out.roots[i] - out.roots[j]) < 1e-6) out.jordan = true;
  CVector scale(m * n);
  for (int j = 0; j < m; ++j) scale.segment(j * n, n).setConstant(std::pow(kI, j));
  const CMatrix pminus = positive_real_projector(cplx(0.0, -1.0) * c);
  const CMatrix id = CMatrix::Identity(m * n, m * n);
  out.minus = column_space(scale.asDiagonal() * pminus, 1e-6);
  out.plus = column_space(scale.asDiagonal() * (id - pminus), 1e-6);
  if (out.minus.cols() + out.plus.cols() != m * n)
    throw Error(ErrorKind::BoundaryNonelliptic, "dim L+ + dim L- != m n");
  return out;
}

inline CauchyData cauchy_data_subspace(const NormalSymbol& ns, double x, int sign) { return cauchy_data(ns.at(x, sign)); }

// ---------------------------------------------------------------------------
// Boundary data and the Lopatinskii condition
// ---------------------------------------------------------------------------

/// B acts on normalized jets (order 0 in every component); P is the boundary
/// projection on C^G-valued functions.
struct BoundaryData {
  MatrixSymbol B;  // G x (m n)
  ProjectionOperator P;

  int G() const { return P.fiber(); }
};

struct LopatinskiiCertificate {
  bool elliptic = false;
  double min_singular = 0.0;
  double worst_x = 0.0;
  int worst_ray = +1;
  double pb_defect = 0.0;
  std::string failure;
};

inline LopatinskiiCertificate check_lopatinskii(const NormalSymbol& ns, const BoundaryData& bd) {
  LopatinskiiCertificate cert;
  cert.min_singular = std::numeric_limits<double>::infinity();
  const int mn = ns.order() * ns.n();
  if (bd.B.a_plus.cols() != mn || bd.B.a_plus.rows() != bd.G())
    throw Error(ErrorKind::InvalidArgument, "boundary symbol must be G x (m n)");
  const int grid = symbol_grid(std::max({ns.support(), bd.B.support(), bd.P.symbol.support()}));
  for (int sign : {+1, -1})
    for (int j = 0; j < grid; ++j) {
      const double x = 2.0 * kPi * j / grid;
      const CMatrix b = bd.B.ray(sign)(x);
      const CMatrix p = bd.P.symbol.ray(sign)(x);
      cert.pb_defect = std::max(cert.pb_defect, (p * b - b).norm());
      const CauchyData cd = cauchy_data_subspace(ns, x, sign);
      const CMatrix fp = frame_of(p);
      if (fp.cols() != cd.minus.cols()) {
        cert.min_singular = 0.0;
        cert.worst_x = x;
        cert.worst_ray = sign;
        cert.failure = "defective boundary condition: dim L- = " + std::to_string(cd.minus.cols()) +
                       ", rank P = " + std::to_string(fp.cols());
        return cert;
      }
      double smin = 1.0;
      if (fp.cols() > 0) {
        const RVector sv = singular_values(fp.adjoint() * b * cd.minus);
        smin = sv(sv.size() - 1);
      }
      if (smin < cert.min_singular) {
        cert.min_singular = smin;
        cert.worst_x = x;
        cert.worst_ray = sign;
      }
    }
  if (cert.pb_defect > 1e-9) {
    cert.failure = "range of B leaves Im p (defect " + std::to_string(cert.pb_defect) + ")";
    return cert;
  }
  cert.elliptic = cert.min_singular > 1e-8;
  if (!cert.elliptic) cert.failure = "degenerate restriction B: L- -> Im p at x = " + std::to_string(cert.worst_x);
  return cert;
}

// ---------------------------------------------------------------------------
// Homotopy traces
// ---------------------------------------------------------------------------

struct HomotopyTrace {
  std::string step;
  std::vector<double> params;
  std::vector<double> margins;  // min |Im root| (or smallest singular value) per sample
  std::vector<int> lminus_dims;
  double max_defect = 0.0;      // step-specific consistency residual
  bool certified = true;
  std::string note;
};

inline std::vector<double> unit_samples() {
  std::vector<double> s;
  for (int j = 0; j <= 10; ++j) s.push_back(j / 10.0);
  return s;
}

// ---------------------------------------------------------------------------
// Order reduction
// ---------------------------------------------------------------------------

namespace detail {

using ScalarPoly = std::vector<cplx>;  // ascending powers of tau

inline ScalarPoly spoly_mul(const ScalarPoly& a, const ScalarPoly& b) {
  ScalarPoly out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// (tau - i)^k (tau + i)^l
inline ScalarPoly factor_poly(int k, int l) {
  ScalarPoly p{1.0};
  for (int j = 0; j < k; ++j) p = spoly_mul(p, {-kI, 1.0});
  for (int j = 0; j < l; ++j) p = spoly_mul(p, {kI, 1.0});
  return p;
}

/// Inverse of the matrix whose column k holds the coefficients of
/// (tau - i)^k (tau + i)^{deg - k}; maps coefficients to the factor basis.
inline CMatrix factor_basis_inverse(int deg) {
  CMatrix m(deg + 1, deg + 1);
  for (int k = 0; k <= deg; ++k) {
    const ScalarPoly p = factor_poly(k, deg - k);
    for (int j = 0; j <= deg; ++j) m(j, k) = p[static_cast<size_t>(j)];
  }
  return m.inverse();
}

/// Matrix-coefficient polynomial.
using MatPoly = std::vector<CMatrix>;

inline MatPoly mat_times_scalar(const CMatrix& a, const ScalarPoly& p) {
  MatPoly out;
  for (auto c : p) out.push_back(c * a);
  return out;
}

inline void mat_add(MatPoly& acc, const MatPoly& x, cplx s = 1.0) {
  if (acc.size() < x.size()) acc.resize(x.size(), CMatrix::Zero(x.front().rows(), x.front().cols()));
  for (size_t j = 0; j < x.size(); ++j) acc[j] += s * x[j];
}

inline CMatrix mat_eval(const MatPoly& p, cplx tau) {
  CMatrix v = CMatrix::Zero(p.front().rows(), p.front().cols());
  for (size_t j = p.size(); j-- > 0;) v = v * tau + p[j];
  return v;
}

/// D_k with D(tau) = sum_k D_k (tau - i)^k (tau + i)^{m-k}.
inline std::vector<CMatrix> factor_decompose(const std::vector<CMatrix>& d) {
  const int m = static_cast<int>(d.size()) - 1;
  const CMatrix inv = factor_basis_inverse(m);
  std::vector<CMatrix> out(static_cast<size_t>(m + 1), CMatrix::Zero(d[0].rows(), d[0].cols()));
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j) out[static_cast<size_t>(k)] += inv(k, j) * d[static_cast<size_t>(j)];
  return out;
}

/// Block polynomial D_s of size m n and degree m.
inline std::vector<CMatrix> order_homotopy(const std::vector<CMatrix>& d, double s) {
  const int m = static_cast<int>(d.size()) - 1;
  const auto n = d[0].rows();
  const auto dk = factor_decompose(d);
  const CMatrix id = CMatrix::Identity(n, n);
  std::vector<std::vector<MatPoly>> blocks(static_cast<size_t>(m), std::vector<MatPoly>(static_cast<size_t>(m)));
  const double sm = std::pow(s, m);
  MatPoly d_orig(d.begin(), d.end());
  MatPoly b00;
  mat_add(b00, d_orig, 1.0 - sm);
  mat_add(b00, mat_times_scalar(dk[0], factor_poly(0, m)), sm);
  blocks[0][0] = b00;
  for (int j = 1; j < m; ++j) {
    MatPoly b;
    mat_add(b, mat_times_scalar(dk[static_cast<size_t>(j)], factor_poly(0, m)), std::pow(s, m - j));
    if (j == m - 1) mat_add(b, mat_times_scalar(dk[static_cast<size_t>(m)], factor_poly(1, m - 1)), s);
    blocks[0][static_cast<size_t>(j)] = b;
  }
  for (int j = 1; j < m; ++j) {
    blocks[static_cast<size_t>(j)][static_cast<size_t>(j)] = mat_times_scalar(id, factor_poly(0, m));
    blocks[static_cast<size_t>(j)][static_cast<size_t>(j - 1)] = mat_times_scalar(id, factor_poly(1, m - 1));
    for (auto& c : blocks[static_cast<size_t>(j)][static_cast<size_t>(j - 1)]) c *= -s;
  }
  std::vector<CMatrix> out(static_cast<size_t>(m + 1), CMatrix::Zero(m * n, m * n));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const MatPoly& b = blocks[static_cast<size_t>(r)][static_cast<size_t>(c)];
      for (size_t j = 0; j < b.size(); ++j) out[j].block(r * n, c * n, n, n) = b[j];
    }
  return out;
}

/// First-order D'(tau) = tau M1 + M0 from the factorization at s = 1.
inline std::vector<CMatrix> reduced_first_order(const std::vector<CMatrix>& d) {
  const int m = static_cast<int>(d.size()) - 1;
  const auto n = d[0].rows();
  const auto dk = factor_decompose(d);
  CMatrix m1 = CMatrix::Zero(m * n, m * n), m0 = m1;
  for (int j = 0; j < m; ++j) {
    m1.block(0, j * n, n, n) = dk[static_cast<size_t>(j)];
    m0.block(0, j * n, n, n) = kI * dk[static_cast<size_t>(j)];
  }
  m1.block(0, (m - 1) * n, n, n) += dk[static_cast<size_t>(m)];
  m0.block(0, (m - 1) * n, n, n) -= kI * dk[static_cast<size_t>(m)];
  for (int j = 1; j < m; ++j) {
    m1.block(j * n, (j - 1) * n, n, n) = -CMatrix::Identity(n, n);
    m0.block(j * n, (j - 1) * n, n, n) = kI * CMatrix::Identity(n, n);
    m1.block(j * n, j * n, n, n) = CMatrix::Identity(n, n);
    m0.block(j * n, j * n, n, n) = kI * CMatrix::Identity(n, n);
  }
  return {m0, m1};
}

/// b_k with sum_j B_j (i tau)^j = sum_k b_k (tau - i)^k (tau + i)^{m-1-k}.
inline CMatrix reduced_boundary(const CMatrix& bjet, int m, int n) {
  const auto g = bjet.rows();
  if (m == 1) return bjet;
  const CMatrix inv = factor_basis_inverse(m - 1);
  CMatrix out = CMatrix::Zero(g, m * n);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) out.block(0, k * n, g, n) += inv(k, j) * std::pow(kI, j) * bjet.block(0, j * n, g, n);
  return out;
}

}  // namespace detail

struct ReducedProblem {
  NormalSymbol ns;
  BoundaryData bd;
  HomotopyTrace trace;
  int adjoined_blocks = 0;  // copies of D_+^{m-1} split off at the end
};

/// Order reduction: the homotopy D_s at s in {0, 0.1, ..., 1}, certified by
/// ellipticity, by pr : L^-(D_s) -> L^-(D) being an isomorphism, and by the
/// explicit preimage U_j = s^j ((tau-i)/(tau+i))^j v on simple decaying roots.
inline ReducedProblem reduce_order(const NormalSymbol& ns, const BoundaryData& bd) {
  ReducedProblem out;
  out.trace.step = "order_reduction";
  const int m = ns.order(), n = ns.n();
  auto cert = check_lopatinskii(ns, bd);
  if (!cert.elliptic) throw Error(ErrorKind::DefectiveBoundaryCondition, cert.failure);
  const int grid = symbol_grid(std::max(ns.support(), bd.B.support()));
  if (m == 1) {
    // constant homotopy: the same certificate at every sample
    double margin = std::numeric_limits<double>::infinity();
    int dim = 0;
    for (int sign : {+1, -1})
      for (int j = 0; j < grid; ++j) {
        const CauchyData cd = cauchy_data_subspace(ns, 2.0 * kPi * j / grid, sign);
        margin = std::min(margin, cd.margin);
        dim = static_cast<int>(cd.minus.cols());
      }
    for (double s : unit_samples()) {
      out.trace.params.push_back(s);
      out.trace.margins.push_back(margin);
      out.trace.lminus_dims.push_back(dim);
    }
    out.ns = ns;
    out.bd = bd;
    out.trace.note = "first order input, unchanged";
    return out;
  }
  for (double s : unit_samples()) {
    double margin = std::numeric_limits<double>::infinity();
    int dim = -1;
    for (int sign : {+1, -1})
      for (int j = 0; j < grid; ++j) {
        const double x = 2.0 * kPi * j / grid;
        const auto d = ns.at(x, sign);
        const CauchyData base = cauchy_data(d);
        CauchyData cd;
        try {
          cd = cauchy_data(detail::order_homotopy(d, s));
        } catch (const Error& e) {
          throw Error(ErrorKind::HomotopyFailure, "order reduction at s = " + std::to_string(s) + ", x = " +
                                                      std::to_string(x) + ": " + e.what());
        }
        margin = std::min(margin, cd.margin);
        dim = static_cast<int>(cd.minus.cols());
        if (cd.minus.cols() != base.minus.cols())
          throw Error(ErrorKind::HomotopyFailure, "dim L- changes at s = " + std::to_string(s));
        // pr: jets of the first block component
        CMatrix pr(m * n, cd.minus.cols());
        for (int jet = 0; jet < m; ++jet) pr.middleRows(jet * n, n) = cd.minus.middleRows(jet * m * n, n);
        if (pr.cols() > 0) {
          const RVector sv = singular_values(pr);
          if (sv(sv.size() - 1) < 1e-8) throw Error(ErrorKind::HomotopyFailure, "pr not injective at s = " + std::to_string(s));
          out.trace.max_defect = std::max(out.trace.max_defect, subspace_distance(column_space(pr, 1e-6), base.minus));
        }
        if (!base.jordan) {
          const auto block = detail::order_homotopy(d, s);
          Eigen::ComplexEigenSolver<CMatrix> es(companion(d));
          for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r) {
            const cplx tau = es.eigenvalues()(r);
            if (tau.imag() <= 0.0) continue;
            const CVector v = es.eigenvectors().col(r).head(n);
            CVector u(m * n);
            for (int jb = 0; jb < m; ++jb) u.segment(jb * n, n) = std::pow(s, jb) * std::pow((tau - kI) / (tau + kI), jb) * v;
            const CMatrix ds = detail::mat_eval(block, tau);
            const double res = (ds * u).norm() / std::max(1e-300, ds.norm() * u.norm());
            out.trace.max_defect = std::max(out.trace.max_defect, res);
          }
        }
      }
    out.trace.params.push_back(s);
    out.trace.margins.push_back(margin);
    out.trace.lminus_dims.push_back(dim);
  }
  if (out.trace.max_defect > 1e-8) {
    out.trace.certified = false;
    throw Error(ErrorKind::HomotopyFailure, "L- isomorphism defect " + std::to_string(out.trace.max_defect));
  }
  // Endpoint: first-order D' and B'.
  auto reduce_ray = [&](int sign) {
    std::vector<Loop> d0, d1, b;
    // Loops are linear in the coefficients, so reduce coefficientwise.
    std::map<int, std::pair<CMatrix, CMatrix>> dparts;
    std::map<int, CMatrix> bparts;
    std::set<int> freqs;
    for (auto& c : ns.d)
      for (auto& [k, mat] : c.ray(sign).coeffs()) freqs.insert(k);
    for (auto& [k, mat] : bd.B.ray(sign).coeffs()) freqs.insert(k);
    Loop r0(m * n), r1(m * n), rb(bd.G(), m * n);
    for (int k : freqs) {
      std::vector<CMatrix> coeff;
      for (auto& c : ns.d) coeff.push_back(c.ray(sign).coeff(k));
      // The affine parts (identity blocks) belong to the k = 0 coefficient only.
      auto red = detail::reduced_first_order(coeff);
      if (k != 0)
        for (int j = 1; j < m; ++j)
          for (auto* mat : {&red[0], &red[1]}) {
            mat->block(j * n, (j - 1) * n, n, n).setZero();
            mat->block(j * n, j * n, n, n).setZero();
          }
      r0.set(k, red[0]);
      r1.set(k, red[1]);
      rb.set(k, detail::reduced_boundary(bd.B.ray(sign).coeff(k), m, n));
    }
    return std::tuple{r0, r1, rb};
  };
  auto [p0, p1, pb] = reduce_ray(+1);
  auto [q0, q1, qb] = reduce_ray(-1);
  out.ns.d = {MatrixSymbol(p0, q0), MatrixSymbol(p1, q1)};
  out.bd = bd;
  out.bd.B = MatrixSymbol(pb, qb);
  out.adjoined_blocks = m - 1;
  // The endpoint must itself satisfy the Lopatinskii condition.
  auto end_cert = check_lopatinskii(out.ns, out.bd);
  if (!end_cert.elliptic) throw Error(ErrorKind::HomotopyFailure, "reduced problem: " + end_cert.failure);
  return out;
}

// ---------------------------------------------------------------------------
// Calderon normalization (x-independent symbols)
// ---------------------------------------------------------------------------

namespace detail {

/// -i d/dt + A form: returns A = d1^{-1} d0.
inline CMatrix first_order_matrix(const std::vector<CMatrix>& d) {
  if (d.size() != 2) throw Error(ErrorKind::InvalidArgument, "expected a first-order symbol");
  return d[1].partialPivLu().solve(d[0]);
}

/// L^- of -i d/dt + A: spectral subspace of eigenvalues with Im < 0.
inline CMatrix calderon_projection(const CMatrix& a) { return positive_real_projector(kI * a); }

inline double imag_margin(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) m = std::min(m, std::abs(es.eigenvalues()(i).imag()));
  return m;
}

inline CMatrix orthogonal_projector(const CMatrix& basis) { return basis * basis.adjoint(); }

}  // namespace detail

struct CalderonResult {
  NormalSymbol ns;        // -i d/dt - i(2q' - 1), q' orthogonal onto L^-
  HomotopyTrace linear;   // A -> -i(2q - 1)
  HomotopyTrace orthogonal;  // q -> q'
};

inline CalderonResult calderon_normalize(const NormalSymbol& ns) {
  if (ns.order() != 1) throw Error(ErrorKind::InvalidArgument, "Calderon normalization needs a first-order symbol");
  if (!ns.x_independent()) throw Error(ErrorKind::NotModeDecomposable, "Calderon normalization needs x-independent coefficients");
  CalderonResult out;
  out.linear.step = "calderon_linear";
  out.orthogonal.step = "calderon_orthogonal";
  std::vector<CMatrix> end_plus, end_minus;
  for (int sign : {+1, -1}) {
    const CMatrix a = detail::first_order_matrix(ns.at(0.0, sign));
    const auto n = a.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    if (detail::imag_margin(a) < 1e-8) throw Error(ErrorKind::BoundaryNonelliptic, "sigma(A) has a real eigenvalue");
    const CMatrix q = detail::calderon_projection(a);
    const CMatrix lminus = column_space(q, 1e-6);
    const CMatrix qo = detail::orthogonal_projector(lminus);
    for (auto [trace, path] : {std::pair{&out.linear, 0}, std::pair{&out.orthogonal, 1}}) {
      for (size_t j = 0; j < unit_samples().size(); ++j) {
        const double s = unit_samples()[j];
        const CMatrix as = path == 0 ? CMatrix((1.0 - s) * a - kI * s * (2.0 * q - id))
                                     : CMatrix(-kI * (2.0 * (s * qo + (1.0 - s) * q) - id));
        const double margin = detail::imag_margin(as);
        if (margin < 1e-8)
          throw Error(ErrorKind::HomotopyFailure, trace->step + ": real eigenvalue at s = " + std::to_string(s));
        const CMatrix l = column_space(detail::calderon_projection(as), 1e-6);
        trace->max_defect = std::max(trace->max_defect, subspace_distance(l, lminus));
        if (sign == +1) {
          trace->params.push_back(s);
          trace->margins.push_back(margin);
          trace->lminus_dims.push_back(static_cast<int>(l.cols()));
        } else {
          trace->margins[j] = std::min(trace->margins[j], margin);
        }
      }
      if (trace->max_defect > 1e-8) {
        trace->certified = false;
        throw Error(ErrorKind::HomotopyFailure, trace->step + ": L- moves by " + std::to_string(trace->max_defect));
      }
    }
    const CMatrix d0 = -kI * (2.0 * qo - id);
    (sign == +1 ? end_plus : end_minus) = {d0, id};
  }
  out.ns = NormalSymbol::constant(end_plus, end_minus);
  return out;
}

// ---------------------------------------------------------------------------
// Cylinder problems and their index
// ---------------------------------------------------------------------------

/// Boundary condition Q R u(end) = g in Im Q.
struct BoundaryCondition {
  CMatrix R;  // (G modes) x (interior modes)
  ProjectionOperator Q;
};

/// (d/dt + A) u = f on S^1 x [0, 1] with one condition per end; A is
/// t-independent and mode-diagonal.
struct CylinderProblem {
  std::string name;
  TruncatedOperator A;
  BoundaryCondition left;
  BoundaryCondition right;
  std::optional<MatrixSymbol> tangential_symbol;  // order-1 principal symbol of A at |xi'| = 1
};

/// Lambda = (1 - d^2/dx^2)^{1/2}.
inline double japanese(int n) { return std::sqrt(1.0 + static_cast<double>(n) * n); }

/// Operator with mode blocks <n> a_{sign n} (sign 0 = +) for an x-independent
/// order-1 symbol a.
inline TruncatedOperator tangential_operator(const MatrixSymbol& a, int N) {
  if (!a.is_x_independent()) throw Error(ErrorKind::NotModeDecomposable, "tangential symbol depends on x");
  TruncatedOperator t;
  t.layout = {N, a.n()};
  t.matrix = CMatrix::Zero(t.layout.dim(), t.layout.dim());
  for (int n = -N; n <= N; ++n)
    t.matrix.block(t.layout.index(n, 0), t.layout.index(n, 0), a.n(), a.n()) =
        japanese(n) * a.ray(n >= 0 ? +1 : -1).coeff(0);
  t.hermitian = (t.matrix - t.matrix.adjoint()).norm() <= 1e-12 * std::max(1.0, t.matrix.norm());
  t.symbol = a;
  t.provenance = "tangential";
  return t;
}

/// Mode-block-diagonal matrix with the same block at every mode.
inline CMatrix mode_constant(const MatrixSymbol& b, const ModeLayout& rows, const ModeLayout& cols) {
  CMatrix out = CMatrix::Zero(rows.dim(), cols.dim());
  for (int n = -rows.N; n <= rows.N; ++n)
    out.block(rows.index(n, 0), cols.index(n, 0), rows.fiber, cols.fiber) = b.ray(n >= 0 ? +1 : -1).coeff(0);
  return out;
}

inline ProjectionOperator complement(const ProjectionOperator& p) {
  ProjectionOperator out = p;
  out.op.matrix = CMatrix::Identity(p.layout().dim(), p.layout().dim()) - p.matrix();
  const Loop one = Loop::identity(p.fiber());
  out.symbol = MatrixSymbol(one - p.symbol.a_plus, one - p.symbol.a_minus);
  out.op.symbol = out.symbol;
  out.op.provenance = "1-" + p.op.provenance;
  return out;
}

inline CMatrix mode_block(const CMatrix& m, const ModeLayout& rows, const ModeLayout& cols, int nr, int nc) {
  return m.block(rows.index(nr, 0), cols.index(nc, 0), rows.fiber, cols.fiber);
}

inline double off_mode_norm(const CMatrix& m, const ModeLayout& rows, const ModeLayout& cols) {
  double s = 0.0;
  if (rows.fiber == 0 || cols.fiber == 0) return s;
  for (int a = -rows.N; a <= rows.N; ++a)
    for (int b = -cols.N; b <= cols.N; ++b)
      if (a != b) s = std::max(s, mode_block(m, rows, cols, a, b).cwiseAbs().maxCoeff());
  return s;
}

struct BvpIndexReport {
  int index = 0;
  int ker = 0;
  int coker = 0;
  std::string route;
  bool fd_checked = false;
  bool fd_agree = true;
  int fd_points = 0;
};

namespace detail {

/// Stable solution basis of u' + A u = 0 on [0, 1]: columns hold u(0) and
/// u(1) for e^{-lambda t} v (Re lambda >= 0) or e^{-lambda (t - 1)} v.
struct SolutionBasis {
  CMatrix u0, u1;
  std::vector<cplx> lambdas;
};

inline SolutionBasis solution_basis(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> es(a);
  const CMatrix& v = es.eigenvectors();
  const RVector sv = singular_values(v);
  if (sv.size() > 0 && sv(sv.size() - 1) < 1e-10 * sv(0))
    throw Error(ErrorKind::IllConditioned, "defective tangential block");
  SolutionBasis b;
  b.u0 = v;
  b.u1 = v;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const cplx l = es.eigenvalues()(j);
    b.lambdas.push_back(l);
    if (l.real() >= 0.0) b.u1.col(j) *= std::exp(-l);
    else b.u0.col(j) *= std::exp(l);
  }
  return b;
}

/// Trapezoid discretization with T steps; returns (ker, coker) of the map
/// u -> (D_h u, F_l^* Q_l R_l u_0, F_r^* Q_r R_r u_T).
inline std::pair<int, int> fd_mode_index(const CMatrix& a, const CMatrix& bl, const CMatrix& br, int T) {
  const auto k = a.rows();
  const double h = 1.0 / T;
  const CMatrix id = CMatrix::Identity(k, k);
  CMatrix m = CMatrix::Zero(T * k + bl.rows() + br.rows(), (T + 1) * k);
  for (int j = 0; j < T; ++j) {
    m.block(j * k, j * k, k, k) = -id / h + 0.5 * a;
    m.block(j * k, (j + 1) * k, k, k) = id / h + 0.5 * a;
  }
  m.block(T * k, 0, bl.rows(), k) = bl;
  m.block(T * k + bl.rows(), T * k, br.rows(), k) = br;
  const RankInfo ri = numerical_rank(m);
  return {ri.zero_count, static_cast<int>(m.rows()) - ri.rank};
}

}  // namespace detail

/// Index of the two-point problem. Mode-diagonal boundary data are solved mode
/// by mode (with a trapezoid cross-check on 64 steps); otherwise the boundary
/// map on the stable solution basis goes through the windowed kernel/cokernel
/// count.
inline BvpIndexReport spectral_bvp_index(const CylinderProblem& cp, bool fd_check = true) {
  const ModeLayout& lay = cp.A.layout;
  const ModeLayout& gl = cp.left.Q.layout();
  const ModeLayout& gr = cp.right.Q.layout();
  if (off_mode_norm(cp.A.matrix, lay, lay) > 1e-12)
    throw Error(ErrorKind::NotModeDecomposable, "tangential operator mixes modes");
  BvpIndexReport rep;
  const bool diagonal = off_mode_norm(cp.left.R, gl, lay) <= 1e-12 && off_mode_norm(cp.right.R, gr, lay) <= 1e-12 &&
                        off_mode_norm(cp.left.Q.matrix(), gl, gl) <= 1e-12 &&
                        off_mode_norm(cp.right.Q.matrix(), gr, gr) <= 1e-12;
  std::vector<detail::SolutionBasis> bases;
  for (int n = -lay.N; n <= lay.N; ++n) bases.push_back(detail::solution_basis(mode_block(cp.A.matrix, lay, lay, n, n)));
  if (diagonal) {
    rep.route = "per-mode";
    rep.fd_checked = fd_check;
    rep.fd_points = 64;
    for (int n = -lay.N; n <= lay.N; ++n) {
      const auto& b = bases[static_cast<size_t>(n + lay.N)];
      const CMatrix ql = mode_block(cp.left.Q.matrix(), gl, gl, n, n);
      const CMatrix qr = mode_block(cp.right.Q.matrix(), gr, gr, n, n);
      const CMatrix fl = frame_of(ql), fr = frame_of(qr);
      const CMatrix bl = fl.adjoint() * ql * mode_block(cp.left.R, gl, lay, n, n);
      const CMatrix br = fr.adjoint() * qr * mode_block(cp.right.R, gr, lay, n, n);
      CMatrix beta(bl.rows() + br.rows(), b.u0.cols());
      beta << bl * b.u0, br * b.u1;
      int ker = static_cast<int>(b.u0.cols()), coker = static_cast<int>(beta.rows());
      if (beta.rows() > 0 && beta.cols() > 0) {
        const RankInfo ri = numerical_rank(beta);
        ker = ri.zero_count;
        coker = static_cast<int>(beta.rows()) - ri.rank;
      }
      if (ker != 0 || coker != 0)
        for (auto l : b.lambdas)
          if (std::abs(l) < 1e-8) throw Error(ErrorKind::ResonantMode, "mode n = " + std::to_string(n));
      rep.ker += ker;
      rep.coker += coker;
      if (fd_check) {
        auto [fk, fc] = detail::fd_mode_index(mode_block(cp.A.matrix, lay, lay, n, n), bl, br, rep.fd_points);
        if (fk != ker || fc != coker) rep.fd_agree = false;
      }
    }
  } else {
    rep.route = "windowed";
    const int dim = lay.dim();
    CMatrix u0 = CMatrix::Zero(dim, dim), u1 = u0;
    for (int n = -lay.N; n <= lay.N; ++n) {
      const auto& b = bases[static_cast<size_t>(n + lay.N)];
      u0.block(lay.index(n, 0), lay.index(n, 0), lay.fiber, lay.fiber) = b.u0;
      u1.block(lay.index(n, 0), lay.index(n, 0), lay.fiber, lay.fiber) = b.u1;
    }
    CMatrix beta(gl.dim() + gr.dim(), dim);
    beta << cp.left.Q.matrix() * cp.left.R * u0, cp.right.Q.matrix() * cp.right.R * u1;
    CMatrix q = CMatrix::Zero(gl.dim() + gr.dim(), gl.dim() + gr.dim());
    q.topLeftCorner(gl.dim(), gl.dim()) = cp.left.Q.matrix();
    q.bottomRightCorner(gr.dim(), gr.dim()) = cp.right.Q.matrix();
    const int w = default_window(lay.N);
    std::vector<int> cod = gl.window(w);
    for (int i : gr.window(w)) cod.push_back(i + gl.dim());
    const KerCoker kc = index_in_subspaces(beta, CMatrix::Identity(dim, dim), q, lay.window(w), cod);
    rep.ker = kc.ker;
    rep.coker = kc.coker;
  }
  rep.index = rep.ker - rep.coker;
  return rep;
}

// ---------------------------------------------------------------------------
// Half-cylinder index from symbol data (x-independent problems)
// ---------------------------------------------------------------------------

/// Sum over modes of index(F_n^* P_n B : L^-(sign n) -> Im P_n), with B
/// applied to normalized jets. Each mode is an exact finite-dimensional count.
inline KerCoker half_cylinder_index(const NormalSymbol& ns, const BoundaryData& bd) {
  if (!ns.x_independent() || !bd.B.is_x_independent())
    throw Error(ErrorKind::NotModeDecomposable, "half-cylinder count needs x-independent data");
  const ModeLayout& gl = bd.P.layout();
  if (off_mode_norm(bd.P.matrix(), gl, gl) > 1e-12)
    throw Error(ErrorKind::NotModeDecomposable, "boundary projection mixes modes");
  const CauchyData cplus = cauchy_data_subspace(ns, 0.0, +1);
  const CauchyData cminus = cauchy_data_subspace(ns, 0.0, -1);
  KerCoker total;
  for (int n = -gl.N; n <= gl.N; ++n) {
    const int sign = n >= 0 ? +1 : -1;
    const CMatrix& lm = (sign > 0 ? cplus : cminus).minus;
    const CMatrix pn = mode_block(bd.P.matrix(), gl, gl, n, n);
    const CMatrix f = frame_of(pn);
    const CMatrix map = f.adjoint() * pn * bd.B.ray(sign).coeff(0) * lm;
    int rank = 0;
    if (map.rows() > 0 && map.cols() > 0) rank = numerical_rank(map).rank;
    total.ker += static_cast<int>(lm.cols()) - rank;
    total.coker += static_cast<int>(f.cols()) - rank;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Rotation to a spectral problem
// ---------------------------------------------------------------------------

struct RotationResult {
  CylinderProblem problem;
  NormalSymbol ns;      // first order on E (+) C^G
  BoundaryData bd;      // B_{pi/2}
  HomotopyTrace trace;
  double identity_defect = 0.0;  // || B_{pi/2} f - f || over orthonormal f in Im p
};

/// Rotation of L^-(D) (+) 0 into 0 (+) Im p through v -> (cos th v, sin th B v),
/// with D_+ adjoined on C^G. Input in the Calderon form -i d/dt - i(2q - 1).
inline RotationResult rotate_to_spectral(const NormalSymbol& ns, const BoundaryData& bd) {
  if (ns.order() != 1 || !ns.x_independent() || !bd.B.is_x_independent())
    throw Error(ErrorKind::NotModeDecomposable, "rotation needs x-independent first-order data");
  auto cert = check_lopatinskii(ns, bd);
  if (!cert.elliptic) throw Error(ErrorKind::DefectiveBoundaryCondition, cert.failure);
  const int n = ns.n(), G = bd.G();
  RotationResult out;
  out.trace.step = "rotation";
  std::vector<CMatrix> qend(2), bend(2);
  for (int ray = 0; ray < 2; ++ray) {
    const int sign = ray == 0 ? +1 : -1;
    const CMatrix fl = cauchy_data_subspace(ns, 0.0, sign).minus;
    const CMatrix b = bd.B.ray(sign).coeff(0);
    const CMatrix p = bd.P.symbol.ray(sign).coeff(0);
    for (int j = 0; j <= 10; ++j) {
      const double th = kPi / 20.0 * j;
      CMatrix v(n + G, fl.cols());
      v << std::cos(th) * fl, std::sin(th) * (b * fl);
      CMatrix bth = CMatrix::Zero(G, n + G);
      if (fl.cols() > 0) {
        Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(v);
        bth = b * fl * cod.pseudoInverse();  // B_th v_th = B v
      }
      const CMatrix lth = column_space(v, 1e-6);
      // symbol of the rotated operator: -i d/dt - i(2 q_th - 1) on E (+) C^G
      const CMatrix qth = lth * lth.adjoint();
      const CMatrix ath = -kI * (2.0 * qth - CMatrix::Identity(n + G, n + G));
      const CauchyData cd = cauchy_data(std::vector<CMatrix>{ath, CMatrix::Identity(n + G, n + G)});
      const double dist = subspace_distance(cd.minus, lth);
      const CMatrix fp = frame_of(p);
      double smin = 1.0;
      if (fp.cols() != cd.minus.cols())
        throw Error(ErrorKind::HomotopyFailure, "rotation loses the rank balance at theta = " + std::to_string(th));
      if (fp.cols() > 0) {
        const RVector sv = singular_values(fp.adjoint() * bth * cd.minus);
        smin = sv(sv.size() - 1);
      }
      if (smin <= 1e-8)
        throw Error(ErrorKind::HomotopyFailure, "rotation degenerates at theta = " + std::to_string(th));
      out.trace.max_defect = std::max(out.trace.max_defect, dist);
      if (ray == 0) {
        out.trace.params.push_back(th);
        out.trace.margins.push_back(smin);
        out.trace.lminus_dims.push_back(static_cast<int>(cd.minus.cols()));
      } else {
        out.trace.margins[static_cast<size_t>(j)] = std::min(out.trace.margins[static_cast<size_t>(j)], smin);
      }
      if (j == 10) {
        qend[static_cast<size_t>(ray)] = qth;
        bend[static_cast<size_t>(ray)] = bth;
        if (fp.cols() > 0)
          out.identity_defect = std::max(out.identity_defect, (bth.rightCols(G) * fp - fp).norm());
        out.identity_defect = std::max(out.identity_defect, bth.leftCols(n).norm());
      }
    }
  }
  if (out.trace.max_defect > 1e-8) {
    out.trace.certified = false;
    throw Error(ErrorKind::HomotopyFailure, "rotated L- drifts from its formula");
  }
  const CMatrix id = CMatrix::Identity(n + G, n + G);
  out.ns = NormalSymbol::constant({CMatrix(-kI * (2.0 * qend[0] - id)), id}, {CMatrix(-kI * (2.0 * qend[1] - id)), id});
  out.bd = bd;
  out.bd.B = MatrixSymbol(Loop::constant(bend[0]), Loop::constant(bend[1]));
  // Spectral problem d/dt + (2q - 1) Lambda with left condition P B_{pi/2} u(0).
  const int N = bd.P.N();
  MatrixSymbol a(Loop::constant(2.0 * qend[0] - id), Loop::constant(2.0 * qend[1] - id), 1);
  CylinderProblem& cp = out.problem;
  cp.name = "rotated";
  cp.A = tangential_operator(a, N);
  cp.tangential_symbol = a;
  cp.left.R = mode_constant(out.bd.B, bd.P.layout(), cp.A.layout);
  cp.left.Q = bd.P;
  const ProjectionOperator pos = nonneg_spectral_projection(cp.A);
  cp.right.Q = complement(pos);
  cp.right.R = cp.right.Q.matrix();
  return out;
}

// ---------------------------------------------------------------------------
// Full reduction chain
// ---------------------------------------------------------------------------

struct ReductionChain {
  std::vector<HomotopyTrace> traces;
  int input_index = 0;
  int reduced_index = 0;     // half-cylinder count after order reduction
  int normalized_index = 0;  // after Calderon normalization
  int endpoint_index = 0;    // spectral problem on [0, 1]
  double identity_defect = 0.0;
  BvpIndexReport endpoint_report;
  bool equal = false;
  bool certified = false;
};

inline ReductionChain reduce_to_spectral(const NormalSymbol& ns, const BoundaryData& bd) {
  ReductionChain out;
  out.input_index = half_cylinder_index(ns, bd).index();
  const ReducedProblem red = reduce_order(ns, bd);
  out.traces.push_back(red.trace);
  out.reduced_index = half_cylinder_index(red.ns, red.bd).index();
  const CalderonResult cal = calderon_normalize(red.ns);
  out.traces.push_back(cal.linear);
  out.traces.push_back(cal.orthogonal);
  out.normalized_index = half_cylinder_index(cal.ns, red.bd).index();
  const RotationResult rot = rotate_to_spectral(cal.ns, red.bd);
  out.traces.push_back(rot.trace);
  out.identity_defect = rot.identity_defect;
  out.endpoint_report = spectral_bvp_index(rot.problem);
  out.endpoint_index = out.endpoint_report.index;
  out.certified = rot.identity_defect <= 1e-10 && out.endpoint_report.fd_agree;
  for (const auto& t : out.traces) out.certified = out.certified && t.certified && t.params.size() == 11;
  out.equal = out.input_index == out.reduced_index && out.reduced_index == out.normalized_index &&
              out.normalized_index == out.endpoint_index;
  return out;
}

// ---------------------------------------------------------------------------
// Subspace index as a boundary problem index
// ---------------------------------------------------------------------------

struct Prop3Report {
  int bvp_index = 0;
  int subspace_index = 0;
  bool equal = false;
  std::string route;
};

/// (d/dt + (1-P1) Lambda (1-P1) - P1 Lambda P1) u = f with (1 - P1) u(0) = g and
/// D u(1) = g' in Im P2.
inline CylinderProblem prop3_problem(const SubspaceTriple& t) {
  const ProjectionOperator p1 = t.P1.orthogonal ? t.P1 : orthogonalize(t.P1);
  const auto& lay = p1.layout();
  CMatrix lambda = CMatrix::Zero(lay.dim(), lay.dim());
  for (int n = -lay.N; n <= lay.N; ++n)
    for (int i = 0; i < lay.fiber; ++i) lambda(lay.index(n, i), lay.index(n, i)) = japanese(n);
  if ((p1.matrix() * lambda - lambda * p1.matrix()).norm() > 1e-10 * lambda.norm())
    throw Error(ErrorKind::NotModeDecomposable, "P1 does not commute with Lambda");
  const CMatrix id = CMatrix::Identity(lay.dim(), lay.dim());
  const CMatrix& p = p1.matrix();
  CylinderProblem cp;
  cp.name = "prop3";
  cp.A.layout = lay;
  cp.A.matrix = (id - p) * lambda * (id - p) - p * lambda * p;
  cp.A.hermitian = true;
  cp.A.provenance = "prop3";
  cp.left.Q = complement(p1);
  cp.left.R = cp.left.Q.matrix();
  cp.right.Q = t.P2;
  cp.right.R = t.D.matrix;
  return cp;
}

inline Prop3Report prop3_check(const SubspaceTriple& t) {
  Prop3Report rep;
  const CylinderProblem cp = prop3_problem(t);
  const BvpIndexReport b = spectral_bvp_index(cp);
  rep.bvp_index = b.index;
  rep.route = b.route;
  rep.subspace_index = analytic_index(t);
  rep.equal = rep.bvp_index == rep.subspace_index && b.fd_agree;
  return rep;
}

// ---------------------------------------------------------------------------
// Doubling and the index formula on the cylinder
// ---------------------------------------------------------------------------

/// Glues sigma(D)(tau, xi') on the first copy (t in [0, 1)) with
/// sigma(D)(-xi) on the second copy, written in the reflected normal
/// coordinate of the double: d1 theta_t + |theta_x| d0(-sign theta_x).
inline TorusSymbol double_symbol(const NormalSymbol& ns) {
  if (ns.order() != 1) throw Error(ErrorKind::InvalidArgument, "doubling implemented for first-order symbols");
  const int grid = std::max(512, 8 * ns.support());
  double jump = 0.0, where = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double x = 2.0 * kPi * j / grid;
    const double dj = (ns.d[0].a_plus(x) - ns.d[0].a_minus(x)).norm() + (ns.d[1].a_plus(x) - ns.d[1].a_minus(x)).norm();
    if (dj > jump) {
      jump = dj;
      where = x;
    }
  }
  if (jump >= 1e-8)
    throw Error(ErrorKind::SeamDiscontinuity, "jump " + std::to_string(jump) + " across the seam at x = " + std::to_string(where));
  TorusSymbol s;
  s.n = ns.n();
  s.seam_jump = jump;
  s.position_dependent = !ns.x_independent();
  s.value = [ns](double x, double t, double tx, double tt) -> CMatrix {
    const bool second = t >= 1.0;
    const int ray = (tx >= 0.0) != second ? +1 : -1;
    return ns.d[1].ray(ray)(x) * tt + std::abs(tx) * ns.d[0].ray(ray)(x);
  };
  return s;
}

/// Smallest singular value of the torus symbol over a direction grid and
/// x grid (t enters only through the copy).
inline double torus_symbol_margin(const TorusSymbol& s, int grid = 64) {
  double m = std::numeric_limits<double>::infinity();
  const int xs = s.position_dependent ? grid : 1;
  for (int a = 0; a < xs; ++a)
    for (double t : {0.5, 1.5})
      for (int j = 0; j < grid; ++j) {
        const double th = 2.0 * kPi * j / grid;
        const RVector sv = singular_values(s.value(2.0 * kPi * a / xs, t, std::cos(th), std::sin(th)));
        m = std::min(m, sv(sv.size() - 1));
      }
  return m;
}

struct Theorem5Report {
  int lhs = 0;
  std::vector<int> torus_levels;
  std::vector<int> torus_values;
  Rational half_double;
  Rational d;
  bool equal = false;
  BvpIndexReport bvp;
};

inline Theorem5Report verify_theorem5(const CylinderProblem& cp, const std::vector<int>& torus_levels = {12, 16, 24}) {
  if (!cp.tangential_symbol) throw Error(ErrorKind::InvalidArgument, "problem carries no tangential symbol");
  Theorem5Report rep;
  rep.bvp = spectral_bvp_index(cp);
  rep.lhs = rep.bvp.index;
  const TorusSymbol ts = double_symbol(NormalSymbol::dt(*cp.tangential_symbol));
  if (torus_symbol_margin(ts) <= 1e-8) throw Error(ErrorKind::NotElliptic, "doubled symbol degenerates");
  const StabilizedIndex ti = torus_index(ts, torus_levels);
  rep.torus_levels = ti.levels;
  rep.torus_values = ti.values;
  rep.half_double = Rational(ti.value, 2);
  rep.d = d_dimension(cp.left.Q);
  rep.equal = Rational(rep.lhs) == rep.half_double - rep.d && rep.bvp.fd_agree;
  return rep;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// A = Lambda (+) (-Lambda), left condition P u(0) with P = diag(1, 0) minus
/// `removed` modes of slot 0 or plus `added` modes of slot 1, right condition
/// the complementary spectral one. `zero_block` appends a boundary slot of
/// rank k fed by no interior component.
inline CylinderProblem dt5_problem(int N, int removed = 0, int added = 0, int zero_block = 0) {
  const MatrixSymbol a = MatrixSymbol::even(Loop::constant((CMatrix(2, 2) << 1, 0, 0, -1).finished()), 1);
  CylinderProblem cp;
  cp.name = "DT5";
  cp.A = tangential_operator(a, N);
  cp.tangential_symbol = a;
  ProjectionOperator p = coordinate_projection({0}, 2, N);
  const ProjectionOperator spectral = p;
  for (int r = 0; r < removed; ++r) p = remove_mode(p, r, 0);
  for (int r = 0; r < added; ++r) p = add_mode(p, r, 1);
  ModeLayout glay = p.layout();
  if (zero_block > 0) {
    p = direct_sum(p, finite_projection(N, 1, 0, zero_block - 1));
    glay = p.layout();
  }
  cp.left.Q = p;
  cp.left.R = CMatrix::Zero(glay.dim(), cp.A.layout.dim());
  for (int n = -N; n <= N; ++n)
    for (int i = 0; i < 2; ++i) cp.left.R(glay.index(n, i), cp.A.layout.index(n, i)) = 1.0;
  cp.right.Q = complement(spectral);
  cp.right.R = cp.right.Q.matrix();
  return cp;
}

}  // namespace evenproj
