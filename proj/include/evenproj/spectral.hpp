#pragma once

#include <boost/math/special_functions/bernoulli.hpp>

#include <functional>
#include <string>
#include <vector>

#include "evenproj/subspace_index.hpp"

namespace evenproj {

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

struct AdmissibilityReport {
  bool admissible = true;
  int violation_degree = -1;  // first degree breaking a^-_alpha = (-1)^alpha a^+_alpha
  bool odd_order = false;     // outside the even-order class
};

/// Parity law per homogeneous degree, the principal part included at degree = order.
inline AdmissibilityReport is_admissible(const MatrixSymbol& s) {
  AdmissibilityReport rep;
  rep.odd_order = s.order % 2 != 0;
  std::vector<LowerTerm> terms = s.lower_terms;
  terms.insert(terms.begin(), LowerTerm{s.order, s.a_plus, s.a_minus});
  for (const auto& t : terms) {
    const double sign = t.degree % 2 == 0 ? 1.0 : -1.0;
    if (distance(t.minus, cplx(sign) * t.plus) > 1e-10) {
      rep.admissible = false;
      rep.violation_degree = t.degree;
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Zeta functions
// ---------------------------------------------------------------------------

/// Hurwitz zeta(sigma, a) for real sigma != 1, a > 0, by Euler-Maclaurin
/// summation with the base shifted past 20.
inline double hurwitz_zeta(double sigma, double a) {
  if (a <= 0.0) throw Error(ErrorKind::InvalidArgument, "hurwitz_zeta needs a > 0");
  if (std::abs(sigma - 1.0) < 1e-12) throw Error(ErrorKind::InvalidArgument, "hurwitz_zeta pole at sigma = 1");
  if (sigma == 0.0) return 0.5 - a;
  const int shift = a < 20.0 ? static_cast<int>(std::ceil(20.0 - a)) : 0;
  double sum = 0.0;
  for (int n = 0; n < shift; ++n) sum += std::pow(a + n, -sigma);
  const double b = a + shift;
  sum += std::pow(b, 1.0 - sigma) / (sigma - 1.0) + 0.5 * std::pow(b, -sigma);
  double rising = sigma;  // sigma (sigma+1) ... (sigma+2j-2)
  double fact = 2.0;      // (2j)!
  for (int j = 1; j <= 12; ++j) {
    const double term = boost::math::bernoulli_b2n<double>(j) / fact * rising * std::pow(b, -sigma - 2 * j + 1);
    sum += term;
    rising *= (sigma + 2 * j - 1) * (sigma + 2 * j);
    fact *= (2.0 * j + 1) * (2.0 * j + 2);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Eigenvalue models and eta
// ---------------------------------------------------------------------------

/// Fourier-diagonal self-adjoint operator with eigenvalues q_i(n), n in Z.
struct EigenModel {
  std::vector<Poly> q;  // one polynomial per fiber slot
  int M0 = 200;
  int K = 6;

  int order() const {
    int m = 0;
    for (auto& p : q) m = std::max(m, p.degree());
    return m;
  }
  TruncatedOperator op(int N) const { return fourier_diagonal(N, q); }
};

struct EtaReport {
  double eta0 = 0.0;
  int dim_ker = 0;
  double eta_reduced = 0.0;
  int tail_order = 0;
  int head_cutoff = 0;
  double residual = 0.0;
  bool odd_order = false;
};

namespace detail {

enum class Eig { Negative, Zero, Positive };

inline Eig classify(double v) {
  const double a = std::abs(v);
  if (a < 1e-12) return Eig::Zero;
  if (a < 1e-8) throw Error(ErrorKind::NearZero, "eigenvalue " + std::to_string(v) + " is neither zero nor resolved");
  return v > 0.0 ? Eig::Positive : Eig::Negative;
}

/// Coefficients of delta(n) = (q(n) - c n^m) / (c n^m) in powers of u = 1/n
/// for the ray n -> sign * infinity, together with the ray's leading
/// coefficient c * sign^m.
struct TailExpansion {
  double lead = 0.0;
  std::vector<double> e;  // e[j] multiplies u^j, j = 0..m (e[0] = 0)
};

inline TailExpansion tail_expansion(const Poly& p, int side) {
  const int m = p.degree();
  TailExpansion t;
  t.lead = p.leading() * (m % 2 != 0 && side < 0 ? -1.0 : 1.0);
  t.e.assign(static_cast<size_t>(m + 1), 0.0);
  // n = side * k with k > 0; q(side k) = sum_j q_j side^j k^j
  for (int j = 1; j <= m; ++j) {
    const int power = m - j;
    const double sgn = power % 2 != 0 && side < 0 ? -1.0 : 1.0;
    const double qj = static_cast<size_t>(power) < p.c.size() ? p.c[static_cast<size_t>(power)] : 0.0;
    t.e[static_cast<size_t>(j)] = qj * sgn / t.lead;
  }
  return t;
}

inline double binom_neg(double s, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b *= (-s - i) / (i + 1);
  return b;
}

inline std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

struct EtaParts {
  double value = 0.0;
  int kernel = 0;
};

/// eta(s) of one slot with head cutoff M0 and tail order K; s = 0 uses the
/// closed continuation sign * [zeta(0, M0+1) - e_1/m] per ray.
inline EtaParts eta_slot(const Poly& p, double s, int M0, int K) {
  const int m = p.degree();
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "eigenvalue law must have degree >= 1");
  EtaParts out;
  for (int k = 0; k <= M0; ++k)  // ascending |n| for a fixed reduction order
    for (int n : k == 0 ? std::vector<int>{0} : std::vector<int>{k, -k}) {
      const double v = p(n);
      switch (classify(v)) {
        case Eig::Zero: ++out.kernel; break;
        case Eig::Positive: out.value += s == 0.0 ? 1.0 : std::pow(v, -s); break;
        case Eig::Negative: out.value -= s == 0.0 ? 1.0 : std::pow(-v, -s); break;
      }
    }
  const double a = M0 + 1.0;
  for (int side : {+1, -1}) {
    const TailExpansion t = tail_expansion(p, side);
    double delta_edge = 0.0;
    for (int j = 1; j <= m; ++j) delta_edge += t.e[static_cast<size_t>(j)] * std::pow(a, -j);
    if (std::abs(delta_edge) >= 0.5)
      throw Error(ErrorKind::EtaResidual, "tail expansion invalid at the head cutoff (|delta| = " +
                                              std::to_string(std::abs(delta_edge)) + ")");
    const double sign = t.lead > 0.0 ? 1.0 : -1.0;
    if (s == 0.0) {
      out.value += sign * (0.5 - a - t.e[1] / m);
      continue;
    }
    std::vector<double> power{1.0};  // delta^k as a polynomial in u
    double tail = 0.0;
    for (int k = 0; k <= K; ++k) {
      const double bk = binom_neg(s, k);
      for (size_t l = 0; l < power.size(); ++l)
        if (power[l] != 0.0) tail += bk * power[l] * hurwitz_zeta(m * s + static_cast<double>(l), a);
      power = poly_mul(power, t.e);
    }
    out.value += sign * std::pow(std::abs(t.lead), -s) * tail;
  }
  return out;
}

}  // namespace detail

/// eta(s, A) = sum over nonzero eigenvalues of sign(l) |l|^{-s}, continued.
inline double eta_function(const EigenModel& model, double s) {
  double v = 0.0;
  for (const auto& p : model.q) v += detail::eta_slot(p, s, model.M0, model.K).value;
  return v;
}

/// eta0 = eta(0, A), eta = (eta0 + dim ker)/2. The residual is the change of
/// eta0 when the head cutoff is doubled.
inline EtaReport eta_invariant(const EigenModel& model) {
  EtaReport rep;
  rep.tail_order = model.K;
  rep.head_cutoff = model.M0;
  rep.odd_order = model.order() % 2 != 0;
  double doubled = 0.0;
  for (const auto& p : model.q) {
    const auto parts = detail::eta_slot(p, 0.0, model.M0, model.K);
    rep.eta0 += parts.value;
    rep.dim_ker += parts.kernel;
    doubled += detail::eta_slot(p, 0.0, 2 * model.M0, model.K).value;
  }
  rep.residual = std::abs(rep.eta0 - doubled);
  if (rep.residual >= 1e-6) throw Error(ErrorKind::EtaResidual, "residual " + std::to_string(rep.residual));
  rep.eta_reduced = (rep.eta0 + rep.dim_ker) / 2.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Operator families and spectral flow
// ---------------------------------------------------------------------------

/// Scalar profile f(t), t in [0, 1].
struct Profile {
  enum class Kind { Linear, Sine };
  Kind kind = Kind::Linear;
  double from = 0.0, to = 1.0;                      // linear
  double offset = 0.0, amplitude = 1.0, phase = 0.0;  // offset + amplitude sin(2 pi t + phase)

  double operator()(double t) const {
    if (kind == Kind::Linear) return from + (to - from) * t;
    return offset + amplitude * std::sin(2.0 * kPi * t + phase);
  }
};

/// Eigenvalue law q_i(n) + shift_i * profile_i(t) per slot.
struct FamilySlot {
  Poly base;
  double shift = 1.0;
  Profile profile;
};

struct DiagonalFamily {
  std::string name;
  std::vector<FamilySlot> slots;
  int N = 24;

  std::vector<Poly> at(double t) const {
    std::vector<Poly> q;
    for (const auto& s : slots) {
      Poly p = s.base;
      if (p.c.empty()) p.c.push_back(0.0);
      p.c[0] += s.shift * s.profile(t);
      q.push_back(p);
    }
    return q;
  }
  TruncatedOperator op(double t) const { return fourier_diagonal(N, at(t)); }
  bool periodic() const { return (op(0.0).matrix - op(1.0).matrix).norm() <= 1e-10; }
};

using OperatorFamily = std::function<TruncatedOperator(double)>;

struct SpectralFlowReport {
  int sf_tracking = 0;
  int sf_sections = 0;
  bool agree = false;
  int samples = 0;
  bool shifted = false;
  std::vector<double> crossings;  // localized within 1e-4
};

namespace detail {

inline RVector sorted_eigenvalues(const TruncatedOperator& a) {
  if (!a.hermitian) throw Error(ErrorKind::InvalidArgument, "family member is not hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

inline bool nonneg(double v) { return v >= -1e-12; }

/// Signed crossing count of sorted branches on one grid; returns false when an
/// interior sample sits on a zero eigenvalue.
inline bool track(const OperatorFamily& f, const std::vector<double>& ts, int& sf, std::vector<double>& where) {
  sf = 0;
  where.clear();
  std::vector<RVector> ev;
  for (size_t j = 0; j < ts.size(); ++j) {
    ev.push_back(sorted_eigenvalues(f(ts[j])));
    if (j > 0 && j + 1 < ts.size() && ev.back().cwiseAbs().minCoeff() < 1e-10) return false;
  }
  for (size_t j = 0; j + 1 < ts.size(); ++j)
    for (Eigen::Index b = 0; b < ev[j].size(); ++b) {
      const bool s0 = nonneg(ev[j](b)), s1 = nonneg(ev[j + 1](b));
      if (s0 == s1) continue;
      sf += s1 ? 1 : -1;
      double lo = ts[j], hi = ts[j + 1];
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (nonneg(sorted_eigenvalues(f(mid))(b)) == s0) lo = mid;
        else hi = mid;
      }
      where.push_back(0.5 * (lo + hi));
    }
  return true;
}

}  // namespace detail

/// Spectral flow over t in [0, 1] by branch tracking and by the relative
/// index of the endpoint nonnegative spectral projections, sf = ind(P_1, P_0)
/// (= d(P_1) - d(P_0) for even families).
inline SpectralFlowReport spectral_flow(const OperatorFamily& f, int samples = 64) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  SpectralFlowReport rep;
  rep.samples = samples;
  std::vector<double> ts(static_cast<size_t>(samples + 1));
  for (int j = 0; j <= samples; ++j) ts[static_cast<size_t>(j)] = static_cast<double>(j) / samples;
  if (!detail::track(f, ts, rep.sf_tracking, rep.crossings)) {
    const double h = 0.5 / samples;
    for (size_t j = 1; j + 1 < ts.size(); ++j) ts[j] += h;
    rep.shifted = true;
    if (!detail::track(f, ts, rep.sf_tracking, rep.crossings))
      throw Error(ErrorKind::SpectralFlowDegenerate, "zero eigenvalue persists on the shifted grid");
  }
  const ProjectionOperator p0 = nonneg_spectral_projection(f(0.0));
  const ProjectionOperator p1 = nonneg_spectral_projection(f(1.0));
  rep.sf_sections = relative_index(p1, p0);
  rep.agree = rep.sf_tracking == rep.sf_sections;
  if (!rep.agree)
    throw Error(ErrorKind::SpectralFlowMismatch, "tracking " + std::to_string(rep.sf_tracking) + " vs sections " +
                                                     std::to_string(rep.sf_sections));
  return rep;
}

inline SpectralFlowReport spectral_flow(const DiagonalFamily& fam, int samples = 64) {
  return spectral_flow([&](double t) { return fam.op(t); }, samples);
}

// ---------------------------------------------------------------------------
// d versus eta for diagonal models
// ---------------------------------------------------------------------------

/// A = P Delta P - (1 - P) Delta (1 - P) with Delta = 1 - d^2/dx^2.
inline TruncatedOperator admissible_from_projection(const ProjectionOperator& p_in) {
  const ProjectionOperator p = p_in.orthogonal ? p_in : orthogonalize(p_in);
  const auto& lay = p.layout();
  CMatrix delta = CMatrix::Zero(lay.dim(), lay.dim());
  for (int n = -lay.N; n <= lay.N; ++n)
    for (int i = 0; i < lay.fiber; ++i) delta(lay.index(n, i), lay.index(n, i)) = 1.0 + static_cast<double>(n) * n;
  const CMatrix id = CMatrix::Identity(lay.dim(), lay.dim());
  const CMatrix& pm = p.matrix();
  TruncatedOperator a;
  a.layout = lay;
  a.matrix = pm * delta * pm - (id - pm) * delta * (id - pm);
  a.matrix = 0.5 * (a.matrix + a.matrix.adjoint());
  a.hermitian = true;
  a.provenance = "admissible(" + p.op.provenance + ")";
  const Loop one = Loop::identity(lay.fiber);
  a.symbol = MatrixSymbol(cplx(2.0) * p.symbol.a_plus - one, cplx(2.0) * p.symbol.a_minus - one, 2);
  return a;
}

struct Prop4Report {
  Rational d;
  double eta = 0.0;
  EtaReport eta_report;
  bool equal = false;
};

/// d(P_+) against eta(A) for a Fourier-diagonal admissible model.
inline Prop4Report check_prop4(const EigenModel& model, int N = 32) {
  Prop4Report rep;
  if (model.order() % 2 != 0) throw Error(ErrorKind::InvalidArgument, "d = eta check needs even order");
  const ProjectionOperator p = nonneg_spectral_projection(model.op(N));
  rep.d = d_dimension(p);
  rep.eta_report = eta_invariant(model);
  rep.eta = rep.eta_report.eta_reduced;
  rep.equal = rep.d.is_integer() && std::abs(rep.d.value() - rep.eta) <= 1e-6;
  return rep;
}

// ---------------------------------------------------------------------------
// Congruence for trivializable range bundles
// ---------------------------------------------------------------------------

namespace detail {

/// Orthonormal frames of Im p(x) on a grid, parallel transported and then
/// corrected by the fractional power of the holonomy so the frame loop closes.
inline std::vector<CMatrix> transported_frames(const Loop& p, int grid) {
  std::vector<CMatrix> frames;
  CMatrix f = frame_of(p(0.0));
  frames.push_back(f);
  for (int j = 1; j <= grid; ++j) {
    const CMatrix pj = p(2.0 * kPi * j / grid);
    const CMatrix g = pj * f;
    Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f = svd.matrixU() * svd.matrixV().adjoint();  // closest isometry onto Im p_j
    frames.push_back(f);
  }
  if (frames.front().cols() == 0) return frames;
  const CMatrix hol = frames.front().adjoint() * frames.back();  // F_end = F_0 hol
  Eigen::ComplexEigenSolver<CMatrix> es(hol);
  const CMatrix v = es.eigenvectors();
  const CMatrix vinv = v.inverse();
  for (int j = 0; j <= grid; ++j) {
    const double frac = static_cast<double>(j) / grid;
    CVector d(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(-frac * std::log(es.eigenvalues()(i)));
    frames[static_cast<size_t>(j)] = frames[static_cast<size_t>(j)] * (v * d.asDiagonal() * vinv);
  }
  frames.pop_back();
  return frames;
}

}  // namespace detail

/// Optional explicit trivialization: maps C^fiber -> C^k on each ray whose
/// restriction to Im p(x) is an isomorphism.
struct Trivialization {
  Loop sigma_plus;
  Loop sigma_minus;
};

struct CongruenceReport {
  double eta = 0.0;
  std::string eta_source;  // "zeta" for diagonal models, "d" otherwise (eta = d for even spectral projections)
  double rhs = 0.0;        // 1/2 ind_t(sigma(xi) sigma(-xi)^{-1})
  bool congruent = false;
  bool half_integral = false;
};

inline double frac_distance(double v) { return std::abs(v - std::round(v)); }

/// eta mod 1 against 1/2 ind_t of the trivialized automorphism.
inline CongruenceReport eta_congruence(const ProjectionOperator& p, std::optional<double> eta_value = std::nullopt,
                                       std::optional<Trivialization> triv = std::nullopt) {
  if (!p.even) throw Error(ErrorKind::NotEven, "congruence needs an even projection");
  CongruenceReport rep;
  if (eta_value) {
    rep.eta = *eta_value;
    rep.eta_source = "zeta";
  } else {
    rep.eta = d_dimension(p).value();
    rep.eta_source = "d";
  }
  const int grid = std::max(1024, 8 * p.symbol.support());
  const Loop& range = p.symbol.a_plus;
  int wind_plus = 0;
  if (triv) {
    const int k = loop_rank(range);
    if (triv->sigma_plus.rows() != k || triv->sigma_minus.rows() != k)
      throw Error(ErrorKind::InvalidArgument, "trivialization rank " + std::to_string(triv->sigma_plus.rows()) +
                                                  " does not match bundle rank " + std::to_string(k));
    wind_plus = winding_number(
        [&](double x) {
          const CMatrix f = frame_of(range(x));
          if (f.cols() == 0) return cplx(1.0);
          return (triv->sigma_plus(x) * f).determinant() / (triv->sigma_minus(x) * f).determinant();
        },
        grid);
  } else {
    // Transported frames give sigma_+ = sigma_- = F^*, so the automorphism is 1.
    const auto frames = detail::transported_frames(range, grid);
    for (size_t j = 0; j < frames.size(); ++j) {
      const CMatrix f = frames[j];
      const CMatrix pj = range(2.0 * kPi * static_cast<double>(j) / grid);
      if (f.cols() > 0 && (pj * f - f).norm() > 1e-6)
        throw Error(ErrorKind::InvalidArgument, "auto trivialization failed at grid point " + std::to_string(j) +
                                                    " (rank " + std::to_string(f.cols()) + ")");
    }
    wind_plus = 0;
  }
  rep.rhs = 0.5 * static_cast<double>(-wind_plus - wind_plus);
  rep.congruent = frac_distance(rep.eta - rep.rhs) <= 1e-6;
  rep.half_integral = frac_distance(2.0 * rep.eta) <= 1e-6;
  return rep;
}

}  // namespace evenproj
