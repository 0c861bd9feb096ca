#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evenproj/linalg.hpp"

namespace evenproj {

// ---------------------------------------------------------------------------
// Loops: matrix-valued trigonometric polynomials on S^1.
// ---------------------------------------------------------------------------

class Loop {
 public:
  Loop() = default;
  Loop(int rows, int cols) : rows_(rows), cols_(cols) {}
  explicit Loop(int n) : Loop(n, n) {}

  static Loop constant(const CMatrix& m) {
    Loop l(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    l.set(0, m);
    return l;
  }
  static Loop scalar(std::map<int, cplx> coeffs) {
    Loop l(1, 1);
    for (auto& [k, c] : coeffs) l.set(k, CMatrix::Constant(1, 1, c));
    return l;
  }
  static Loop identity(int n) { return constant(CMatrix::Identity(n, n)); }
  static Loop zero(int rows, int cols) { return Loop(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  const std::map<int, CMatrix>& coeffs() const { return coeffs_; }

  void set(int k, const CMatrix& m) {
    if (m.rows() != rows_ || m.cols() != cols_)
      throw Error(ErrorKind::InvalidArgument, "loop coefficient has wrong shape");
    coeffs_[k] = m;
  }
  void add(int k, const CMatrix& m) {
    auto it = coeffs_.find(k);
    if (it == coeffs_.end()) set(k, m);
    else it->second += m;
  }

  /// Largest |k| carrying a coefficient.
  int support() const {
    int s = 0;
    for (auto& [k, m] : coeffs_)
      if (m.norm() > 0.0) s = std::max(s, std::abs(k));
    return s;
  }
  int max_frequency() const {
    int s = std::numeric_limits<int>::min();
    for (auto& [k, m] : coeffs_)
      if (m.norm() > 0.0) s = std::max(s, k);
    return s == std::numeric_limits<int>::min() ? 0 : s;
  }
  int min_frequency() const {
    int s = std::numeric_limits<int>::max();
    for (auto& [k, m] : coeffs_)
      if (m.norm() > 0.0) s = std::min(s, k);
    return s == std::numeric_limits<int>::max() ? 0 : s;
  }
  bool is_constant() const { return support() == 0; }

  CMatrix operator()(double x) const {
    CMatrix out = CMatrix::Zero(rows_, cols_);
    for (auto& [k, m] : coeffs_) out += std::exp(kI * (static_cast<double>(k) * x)) * m;
    return out;
  }

  /// Coefficient at frequency k (zero when absent).
  CMatrix coeff(int k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? CMatrix::Zero(rows_, cols_) : it->second;
  }

  Loop adjoint() const {
    Loop out(cols_, rows_);
    for (auto& [k, m] : coeffs_) out.set(-k, m.adjoint());
    return out;
  }

  friend Loop operator*(const Loop& a, const Loop& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::InvalidArgument, "loop product shape mismatch");
    Loop out(a.rows_, b.cols_);
    for (auto& [ka, ma] : a.coeffs_)
      for (auto& [kb, mb] : b.coeffs_) out.add(ka + kb, ma * mb);
    return out;
  }
  friend Loop operator+(const Loop& a, const Loop& b) {
    Loop out = a;
    for (auto& [k, m] : b.coeffs_) out.add(k, m);
    return out;
  }
  friend Loop operator-(const Loop& a, const Loop& b) {
    Loop out = a;
    for (auto& [k, m] : b.coeffs_) out.add(k, -m);
    return out;
  }
  friend Loop operator*(cplx s, const Loop& a) {
    Loop out = a;
    for (auto& [k, m] : out.coeffs_) m *= s;
    return out;
  }

  /// Max coefficientwise difference.
  friend double distance(const Loop& a, const Loop& b) {
    double d = 0.0;
    Loop diff = a - b;
    for (auto& [k, m] : diff.coeffs_) d = std::max(d, m.cwiseAbs().maxCoeff());
    return d;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::map<int, CMatrix> coeffs_;
};

/// Homogeneous component of a complete symbol, as values on the two rays.
struct LowerTerm {
  int degree = 0;
  Loop plus;
  Loop minus;
};

/// Order-m classical symbol on S^1 given by its values on the rays xi = +1
/// and xi = -1.
struct MatrixSymbol {
  Loop a_plus;
  Loop a_minus;
  int order = 0;
  std::vector<LowerTerm> lower_terms;

  MatrixSymbol() = default;
  MatrixSymbol(Loop plus, Loop minus, int ord = 0) : a_plus(std::move(plus)), a_minus(std::move(minus)), order(ord) {
    if (a_plus.rows() != a_minus.rows() || a_plus.cols() != a_minus.cols())
      throw Error(ErrorKind::InvalidArgument, "ray loops have different shapes");
  }
  static MatrixSymbol even(const Loop& l, int ord = 0) { return {l, l, ord}; }

  int n() const { return a_plus.rows(); }
  int support() const { return std::max(a_plus.support(), a_minus.support()); }
  const Loop& ray(int sign) const { return sign >= 0 ? a_plus : a_minus; }
  bool is_even(double tol = 1e-10) const { return distance(a_plus, a_minus) <= tol; }
  bool is_x_independent() const { return a_plus.is_constant() && a_minus.is_constant(); }

  friend MatrixSymbol operator*(const MatrixSymbol& a, const MatrixSymbol& b) {
    return {a.a_plus * b.a_plus, a.a_minus * b.a_minus, a.order + b.order};
  }
};

// ---------------------------------------------------------------------------
// Truncated operators
// ---------------------------------------------------------------------------

struct TruncatedOperator {
  CMatrix matrix;
  ModeLayout layout;
  std::string provenance;
  std::optional<MatrixSymbol> symbol;
  bool hermitian = false;

  int N() const { return layout.N; }
  int fiber() const { return layout.fiber; }

  static TruncatedOperator identity(int N, int fiber) {
    TruncatedOperator t;
    t.layout = {N, fiber};
    t.matrix = CMatrix::Identity(t.layout.dim(), t.layout.dim());
    t.provenance = "identity";
    t.symbol = MatrixSymbol::even(Loop::identity(fiber));
    t.hermitian = true;
    return t;
  }

  /// Verifies the hermiticity flag: ||M - M*|| <= 1e-10 ||M||.
  void certify_hermitian() const {
    if (!hermitian) return;
    const double n = matrix.norm();
    if ((matrix - matrix.adjoint()).norm() > 1e-10 * std::max(n, 1e-300))
      throw Error(ErrorKind::InvalidArgument, "operator flagged hermitian is not");
  }
};

/// Multiplication by a loop, compressed to modes |n| <= N.
inline CMatrix multiplication_matrix(const Loop& f, const ModeLayout& lay) {
  const int fib = lay.fiber;
  if (f.rows() != fib || f.cols() != fib) throw Error(ErrorKind::InvalidArgument, "loop/fiber mismatch");
  CMatrix m = CMatrix::Zero(lay.dim(), lay.dim());
  for (auto& [k, c] : f.coeffs())
    for (int n = -lay.N; n <= lay.N; ++n) {
      const int target = n + k;
      if (target < -lay.N || target > lay.N) continue;
      m.block(lay.index(target, 0), lay.index(n, 0), fib, fib) = c;
    }
  return m;
}

/// Orthogonal projection onto modes n >= 0 (n = 0 belongs to the nonnegative part).
inline CMatrix hardy_matrix(const ModeLayout& lay) {
  CMatrix m = CMatrix::Zero(lay.dim(), lay.dim());
  for (int n = 0; n <= lay.N; ++n)
    for (int i = 0; i < lay.fiber; ++i) m(lay.index(n, i), lay.index(n, i)) = 1.0;
  return m;
}

/// Smallest truncation level quantize_circle accepts for a symbol.
inline int min_truncation(const MatrixSymbol& s) { return std::max(1, 2 * s.support()); }

/// Op(s) = M_{a+} Pi_+ + M_{a-} Pi_-, compressed to |n| <= N.
inline TruncatedOperator quantize_circle(const MatrixSymbol& s, int N) {
  if (s.a_plus.rows() != s.a_plus.cols()) throw Error(ErrorKind::InvalidArgument, "symbol must be square");
  const int need = min_truncation(s);
  if (N < need)
    throw Error(ErrorKind::TruncationTooSmall, "N = " + std::to_string(N) + " below required minimum " + std::to_string(need));
  TruncatedOperator t;
  t.layout = {N, s.n()};
  const CMatrix hardy = hardy_matrix(t.layout);
  const CMatrix id = CMatrix::Identity(t.layout.dim(), t.layout.dim());
  t.matrix = multiplication_matrix(s.a_plus, t.layout) * hardy + multiplication_matrix(s.a_minus, t.layout) * (id - hardy);
  t.provenance = "quantize_circle";
  t.symbol = s;
  return t;
}

/// Real polynomial in the mode number, coefficients in ascending powers.
struct Poly {
  std::vector<double> c;

  int degree() const {
    int d = static_cast<int>(c.size()) - 1;
    while (d > 0 && c[static_cast<size_t>(d)] == 0.0) --d;
    return std::max(d, 0);
  }
  double leading() const { return c.empty() ? 0.0 : c[static_cast<size_t>(degree())]; }
  double operator()(double n) const {
    double v = 0.0;
    for (size_t k = c.size(); k-- > 0;) v = v * n + c[k];
    return v;
  }
  std::string str() const {
    std::ostringstream os;
    os.precision(17);
    for (size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
    return "[" + os.str() + "]";
  }
};

/// Hermitian operator diag(q_i(n)) on modes |n| <= N and fiber slots i. Its
/// normalized principal symbol is sign(leading_i) * (+-1)^deg_i on the rays.
inline TruncatedOperator fourier_diagonal(int N, const std::vector<Poly>& q) {
  TruncatedOperator t;
  t.layout = {N, static_cast<int>(q.size())};
  t.matrix = CMatrix::Zero(t.layout.dim(), t.layout.dim());
  CMatrix plus = CMatrix::Zero(t.fiber(), t.fiber()), minus = plus;
  int order = 0;
  for (int i = 0; i < t.fiber(); ++i) {
    const Poly& p = q[static_cast<size_t>(i)];
    for (int n = -N; n <= N; ++n) t.matrix(t.layout.index(n, i), t.layout.index(n, i)) = p(n);
    const double s = p.leading() >= 0.0 ? 1.0 : -1.0;
    plus(i, i) = s;
    minus(i, i) = p.degree() % 2 == 0 ? s : -s;
    order = std::max(order, p.degree());
  }
  t.symbol = MatrixSymbol(Loop::constant(plus), Loop::constant(minus), order);
  t.hermitian = true;
  t.provenance = "fourier_diagonal";
  return t;
}

// ---------------------------------------------------------------------------
// Ellipticity and winding numbers
// ---------------------------------------------------------------------------

struct EllipticityReport {
  bool elliptic = false;
  double min_abs_det = 0.0;
  double worst_x = 0.0;
  int worst_ray = +1;
  int grid = 0;
};

inline int ellipticity_grid(const MatrixSymbol& s) { return std::max(512, 8 * s.support()); }

/// Grid check of det a_+- (x) != 0. Returns a failure report when the minimum
/// is below 1e-12 and throws InconclusiveEllipticity in [1e-12, 1e-8].
inline EllipticityReport validate_elliptic(const MatrixSymbol& s) {
  if (!s.a_plus.square()) throw Error(ErrorKind::InvalidArgument, "symbol must be square");
  EllipticityReport rep;
  rep.grid = ellipticity_grid(s);
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  for (int sign : {+1, -1}) {
    const Loop& l = s.ray(sign);
    for (int j = 0; j < rep.grid; ++j) {
      const double x = 2.0 * kPi * j / rep.grid;
      const double d = std::abs(l(x).determinant());
      if (d < rep.min_abs_det) {
        rep.min_abs_det = d;
        rep.worst_x = x;
        rep.worst_ray = sign;
      }
    }
  }
  if (rep.min_abs_det > 1e-8) {
    rep.elliptic = true;
  } else if (rep.min_abs_det >= 1e-12) {
    throw Error(ErrorKind::InconclusiveEllipticity,
                "min |det| = " + std::to_string(rep.min_abs_det) + " at x = " + std::to_string(rep.worst_x));
  }
  return rep;
}

using ScalarLoopFn = std::function<cplx(double)>;

/// Winding number of a nonvanishing scalar function on [0, 2pi] by phase
/// unwrapping. The grid doubles (from `grid` points) whenever a phase step
/// reaches pi/2; gives up after 2^16 points.
inline int winding_number(const ScalarLoopFn& f, int grid = 1024) {
  for (int pts = grid; pts <= (1 << 16); pts *= 2) {
    std::vector<cplx> vals(static_cast<size_t>(pts));
    for (int j = 0; j < pts; ++j) {
      vals[static_cast<size_t>(j)] = f(2.0 * kPi * j / pts);
      if (std::abs(vals[static_cast<size_t>(j)]) <= 1e-8)
        throw Error(ErrorKind::NearZero, "|f| <= 1e-8 at x = " + std::to_string(2.0 * kPi * j / pts));
    }
    double total = 0.0;
    bool refine = false;
    for (int j = 0; j < pts; ++j) {
      const double step = std::arg(vals[static_cast<size_t>((j + 1) % pts)] / vals[static_cast<size_t>(j)]);
      if (std::abs(step) >= kPi / 2) { refine = true; break; }
      total += step;
    }
    if (!refine) return static_cast<int>(std::lround(total / (2.0 * kPi)));
  }
  throw Error(ErrorKind::RefineGrid, "phase steps stay >= pi/2 after refinement");
}

inline int winding_number(const Loop& l, int grid = 1024) {
  if (!l.square()) throw Error(ErrorKind::InvalidArgument, "winding of non-square loop");
  return winding_number([&](double x) { return l(x).determinant(); }, std::max(grid, 8 * l.support()));
}

/// ind_t = wind det a_- - wind det a_+.
inline int classical_index_t(const MatrixSymbol& s) {
  auto rep = validate_elliptic(s);
  if (!rep.elliptic)
    throw Error(ErrorKind::NotElliptic, "det vanishes at x = " + std::to_string(rep.worst_x));
  return winding_number(s.a_minus) - winding_number(s.a_plus);
}

// ---------------------------------------------------------------------------
// Numerical index of truncated operators
// ---------------------------------------------------------------------------

inline int default_window(int N) { return N / 2; }

/// dim ker - dim coker of a truncated operator on the full space, using the
/// interior window |n| <= N/2.
inline KerCoker operator_kernel_cokernel(const TruncatedOperator& op) {
  const CMatrix id = CMatrix::Identity(op.layout.dim(), op.layout.dim());
  const auto w = op.layout.window(default_window(op.N()));
  return index_in_subspaces(op.matrix, id, id, w, w);
}

inline int operator_index(const TruncatedOperator& op) { return operator_kernel_cokernel(op).index(); }

struct StabilizedIndex {
  std::vector<int> levels;
  std::vector<int> values;
  int value = 0;
};

/// Index of quantize_circle(s, N) at each level; throws TruncationUnstable
/// when the values disagree.
inline StabilizedIndex circle_index(const MatrixSymbol& s, const std::vector<int>& levels = {24, 32, 48}) {
  StabilizedIndex out;
  out.levels = levels;
  for (int N : levels) out.values.push_back(operator_index(quantize_circle(s, N)));
  for (int v : out.values)
    if (v != out.values.front()) {
      std::string msg = "indices";
      for (size_t i = 0; i < levels.size(); ++i)
        msg += " N=" + std::to_string(levels[i]) + ":" + std::to_string(out.values[i]);
      throw Error(ErrorKind::TruncationUnstable, msg);
    }
  out.value = out.values.empty() ? 0 : out.values.front();
  return out;
}

// ---------------------------------------------------------------------------
// Torus symbols and quantization
// ---------------------------------------------------------------------------

/// Order-0 symbol on T^2 = S^1_x x S^1_t (t in [0, 2), period 2) as a
/// function of position and a unit covector direction (theta_x, theta_t).
struct TorusSymbol {
  using Fn = std::function<CMatrix(double x, double t, double theta_x, double theta_t)>;
  Fn value;
  int n = 1;
  bool position_dependent = true;
  double seam_jump = 0.0;  // continuity certificate (max jump across gluing circles)
};

/// Sparse quantization on the lattice |k1|, |k2| <= N tensored with the fiber.
struct TorusOperator {
  Eigen::SparseMatrix<cplx> matrix;
  int N = 0;
  int fiber = 1;

  int side() const { return 2 * N + 1; }
  int dim() const { return side() * side() * fiber; }
  int index(int k1, int k2, int i) const { return ((k1 + N) * side() + (k2 + N)) * fiber + i; }
  std::vector<int> window(int w) const {
    std::vector<int> out;
    for (int a = -w; a <= w; ++a)
      for (int b = -w; b <= w; ++b)
        for (int i = 0; i < fiber; ++i) out.push_back(index(a, b, i));
    return out;
  }
};

/// For each lattice frequency k the column block is the multiplication by
/// s(., ., k/|k|) applied to e_k; k = 0 uses the direction (1, 0). Position
/// dependence is resolved by a DFT on a (4N)^2 grid with coefficients below
/// 1e-14 dropped.
inline TorusOperator quantize_torus(const TorusSymbol& s, int N) {
  if (N < 8) throw Error(ErrorKind::TruncationTooSmall, "torus quantization needs N >= 8");
  if (s.seam_jump > 1e-8) throw Error(ErrorKind::SeamDiscontinuity, "symbol is discontinuous across the seam");
  TorusOperator op;
  op.N = N;
  op.fiber = s.n;
  const int fib = s.n;
  const int G = s.position_dependent ? 4 * N : 1;
  std::vector<Eigen::Triplet<cplx>> trips;
  std::map<std::pair<int, int>, std::vector<CMatrix>> cache;  // direction -> Fourier coefficients
  // coefficient (j1, j2) for |j| <= 2N of e^{i(j1 x + j2 pi t)}, as W S W^T per fiber entry
  const int J = s.position_dependent ? 2 * N : 0;
  const int cside = 2 * J + 1;
  CMatrix W(cside, G);
  for (int j = -J; j <= J; ++j)
    for (int a = 0; a < G; ++a) W(j + J, a) = std::exp(-kI * (2.0 * kPi * j * a / G)) / static_cast<double>(G);
  auto coefficients = [&](int k1, int k2) -> const std::vector<CMatrix>& {
    int g = std::gcd(std::abs(k1), std::abs(k2));
    std::pair<int, int> key = g == 0 ? std::pair{1, 0} : std::pair{k1 / g, k2 / g};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double norm = std::hypot(key.first, key.second);
    const double tx = key.first / norm, tt = key.second / norm;
    std::vector<CMatrix> grid(static_cast<size_t>(fib * fib), CMatrix(G, G));
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < G; ++b) {
        const CMatrix v = s.value(2.0 * kPi * a / G, 2.0 * b / G, tx, tt);
        for (int r = 0; r < fib; ++r)
          for (int c = 0; c < fib; ++c) grid[static_cast<size_t>(r * fib + c)](a, b) = v(r, c);
      }
    std::vector<CMatrix> coef(static_cast<size_t>(cside * cside), CMatrix::Zero(fib, fib));
    for (int r = 0; r < fib; ++r)
      for (int c = 0; c < fib; ++c) {
        const CMatrix f = W * grid[static_cast<size_t>(r * fib + c)] * W.transpose();
        for (int i1 = 0; i1 < cside; ++i1)
          for (int i2 = 0; i2 < cside; ++i2) coef[static_cast<size_t>(i1 * cside + i2)](r, c) = f(i1, i2);
      }
    return cache.emplace(key, std::move(coef)).first->second;
  };
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2) {
      const auto& coef = coefficients(k1, k2);
      for (int j1 = -J; j1 <= J; ++j1)
        for (int j2 = -J; j2 <= J; ++j2) {
          const int m1 = k1 + j1, m2 = k2 + j2;
          if (std::abs(m1) > N || std::abs(m2) > N) continue;
          const CMatrix& c = coef[static_cast<size_t>((j1 + J) * cside + (j2 + J))];
          for (int r = 0; r < fib; ++r)
            for (int q = 0; q < fib; ++q)
              if (std::abs(c(r, q)) > 1e-14) trips.emplace_back(op.index(m1, m2, r), op.index(k1, k2, q), c(r, q));
        }
    }
  op.matrix.resize(op.dim(), op.dim());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  return op;
}

namespace detail {

/// Dense rows x cols submatrix keeping only rows that touch the given columns.
inline CMatrix compact_columns(const Eigen::SparseMatrix<cplx>& m, const std::vector<int>& cols) {
  std::map<int, int> row_map;
  std::vector<Eigen::Triplet<cplx>> entries;
  for (size_t j = 0; j < cols.size(); ++j)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, cols[j]); it; ++it) {
      auto [pos, inserted] = row_map.emplace(static_cast<int>(it.row()), static_cast<int>(row_map.size()));
      entries.emplace_back(pos->second, static_cast<int>(j), it.value());
    }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(row_map.size()), static_cast<Eigen::Index>(cols.size()));
  for (auto& e : entries) out(e.row(), e.col()) += e.value();
  return out;
}

}  // namespace detail

namespace detail {

/// Zero count of the columns `cols` of m, summed over the connected
/// components of the row/column incidence graph (rank is additive over
/// block-diagonal pieces).
inline int sparse_zero_count(const Eigen::SparseMatrix<cplx>& m, const std::vector<int>& cols) {
  std::vector<int> parent(cols.size());
  for (size_t j = 0; j < cols.size(); ++j) parent[j] = static_cast<int>(j);
  auto find = [&](int a) {
    while (parent[static_cast<size_t>(a)] != a) a = parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
    return a;
  };
  std::map<int, int> row_owner;
  for (size_t j = 0; j < cols.size(); ++j)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, cols[j]); it; ++it) {
      auto [pos, inserted] = row_owner.emplace(static_cast<int>(it.row()), static_cast<int>(j));
      if (!inserted) parent[static_cast<size_t>(find(static_cast<int>(j)))] = find(pos->second);
    }
  std::map<int, std::vector<int>> groups;
  for (size_t j = 0; j < cols.size(); ++j) groups[find(static_cast<int>(j))].push_back(cols[j]);
  int zeros = 0;
  for (auto& [root, g] : groups) zeros += numerical_rank(compact_columns(m, g)).zero_count;
  return zeros;
}

}  // namespace detail

/// Numerical index of the torus quantization (window |k|_inf <= N/2).
inline int torus_index(const TorusOperator& op) {
  const auto w = op.window(default_window(op.N));
  const int ker = detail::sparse_zero_count(op.matrix, w);
  Eigen::SparseMatrix<cplx> adj = op.matrix.adjoint();
  const int coker = detail::sparse_zero_count(adj, w);
  return ker - coker;
}

inline StabilizedIndex torus_index(const TorusSymbol& s, const std::vector<int>& levels = {12, 16, 24}) {
  StabilizedIndex out;
  out.levels = levels;
  for (int N : levels) out.values.push_back(torus_index(quantize_torus(s, N)));
  for (int v : out.values)
    if (v != out.values.front()) throw Error(ErrorKind::TruncationUnstable, "torus index does not stabilize");
  out.value = out.values.empty() ? 0 : out.values.front();
  return out;
}

}  // namespace evenproj
