#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evenproj/report.hpp"

namespace evenproj {

// ---------------------------------------------------------------------------
// Small constructors
// ---------------------------------------------------------------------------

inline Loop zpow(int k) { return Loop::scalar({{k, 1.0}}); }

inline CMatrix cmat(int rows, int cols, std::initializer_list<cplx> v) {
  CMatrix m(rows, cols);
  auto it = v.begin();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  return m;
}

/// Block-diagonal loop from scalar loops.
inline Loop diag_loop(const std::vector<Loop>& entries) {
  const int n = static_cast<int>(entries.size());
  Loop out(n);
  for (int i = 0; i < n; ++i)
    for (const auto& [k, m] : entries[static_cast<size_t>(i)].coeffs()) {
      CMatrix e = CMatrix::Zero(n, n);
      e(i, i) = m(0, 0);
      out.add(k, e);
    }
  return out;
}

inline Loop const_diag(std::initializer_list<cplx> d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  int i = 0;
  for (auto v : d) m(i, i) = v, ++i;
  return Loop::constant(m);
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

struct TripleFixture {
  TripleSpec spec;
  std::optional<int> ind_a;
};

struct ModelFixture {
  std::string name;
  EigenModel model;
  std::optional<double> eta;
  std::optional<int> d;
};

struct FamilyFixture {
  DiagonalFamily family;
  std::optional<int> sf;
};

struct ProblemFixture {
  io::ProblemSpec spec;
  std::optional<int> index;
};

struct CongruenceFixture {
  std::string name;
  std::function<ProjectionOperator(int)> build;
  std::optional<EigenModel> model;  // eta from the zeta route when present
  std::optional<Trivialization> triv;
};

inline TripleSpec make_triple(std::string name, MatrixSymbol a, ProjectionSpec p1, ProjectionSpec p2) {
  TripleSpec t;
  t.name = std::move(name);
  t.a = std::move(a);
  t.p1 = std::move(p1);
  t.p2 = std::move(p2);
  return t;
}

/// v v^* with v = (1, e^{ix}) / sqrt 2.
inline Loop rotating_line() {
  Loop p(2);
  p.set(0, 0.5 * CMatrix::Identity(2, 2));
  p.set(1, cmat(2, 2, {0.0, 0.0, 0.5, 0.0}));
  p.set(-1, cmat(2, 2, {0.0, 0.5, 0.0, 0.0}));
  return p;
}

/// v v^* with v = (cos x, sin x).
inline Loop real_line() {
  Loop p(2);
  p.set(0, 0.5 * CMatrix::Identity(2, 2));
  p.set(2, cmat(2, 2, {0.25, cplx(0.0, -0.25), cplx(0.0, -0.25), -0.25}));
  p.set(-2, cmat(2, 2, {0.25, cplx(0.0, 0.25), cplx(0.0, 0.25), -0.25}));
  return p;
}

inline std::vector<TripleFixture> builtin_triples() {
  using PS = ProjectionSpec;
  const PS one = PS::bundle(Loop::identity(1));
  std::vector<TripleFixture> out;
  out.push_back({make_triple("convention", MatrixSymbol(zpow(1), Loop::identity(1)), one, one), -1});
  out.push_back({make_triple("even-z2", MatrixSymbol::even(zpow(2)), one, one), 0});
  out.push_back({make_triple("z-zbar", MatrixSymbol(zpow(1), zpow(-1)), one, one), -2});
  out.push_back({make_triple("z2-one", MatrixSymbol(zpow(2), Loop::identity(1)), one, one), -2});
  out.push_back({make_triple("one-z", MatrixSymbol(Loop::identity(1), zpow(1)), one, one), 1});
  const PS coord = PS::bundle(const_diag({1.0, 0.0}));
  out.push_back({make_triple("fiber2-coordinate", MatrixSymbol(diag_loop({zpow(1), zpow(0)}), Loop::identity(2)), coord, coord), -1});
  const PS rot = PS::bundle(rotating_line());
  out.push_back({make_triple("fiber2-rotating", MatrixSymbol(diag_loop({zpow(1), zpow(1)}), Loop::identity(2)), rot, rot), std::nullopt});
  PS removed = one;
  removed.remove = {{0, 0}};
  out.push_back({make_triple("remove-mode", MatrixSymbol::even(Loop::identity(1)), removed, one), -1});
  PS added = coord;
  added.add = {{0, 1}, {1, 1}};
  out.push_back({make_triple("add-modes", MatrixSymbol::even(Loop::identity(2)), added, coord), 2});
  const PS quarter = PS::spectral({Poly{{-0.25, 0.0, 1.0}}});
  out.push_back({make_triple("spectral-quarter", MatrixSymbol(zpow(1), Loop::identity(1)), quarter, quarter), -1});
  out.push_back({make_triple("spectral-vs-identity", MatrixSymbol::even(Loop::identity(1)), quarter, one), -1});
  out.push_back({make_triple("finite", MatrixSymbol::even(Loop::identity(1)), PS::finite(1, 0, 2), PS::finite(1, 0, 1)), 1});
  PS f3 = PS::bundle(const_diag({1.0, 1.0, 0.0}));
  PS f3r = f3;
  f3r.remove = {{1, 0}};
  out.push_back({make_triple("fiber3-mixed", MatrixSymbol(diag_loop({zpow(2), zpow(-1), zpow(0)}), diag_loop({zpow(0), zpow(1), zpow(0)})), f3r, f3), -1});
  return out;
}

/// Seeded corpus of elliptic even triples: a_(+-) = V diag(z^k) V^* + eps E(x)
/// with P = V diag(1..1, 0..0) V^*, random finite-rank changes.
inline std::vector<TripleFixture> random_triples(std::uint64_t seed, int count) {
  std::vector<TripleFixture> out;
  for (int c = 0; c < count; ++c) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(c));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto rmat = [&](int n) {
      CMatrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = {u(rng), u(rng)};
      return m;
    };
    const int f = rint(1, 3);
    const int r = rint(1, f);
    const CMatrix v = Eigen::HouseholderQR<CMatrix>(rmat(f)).householderQ();
    CMatrix pr = CMatrix::Zero(f, f);
    for (int i = 0; i < r; ++i) pr(i, i) = 1.0;
    const CMatrix p = v * pr * v.adjoint();
    auto ray = [&]() {
      Loop a(f);
      for (int i = 0; i < f; ++i) {
        CMatrix e = CMatrix::Zero(f, f);
        e(i, i) = 1.0;
        a.add(rint(-2, 2), v * e * v.adjoint());
      }
      // multiplicative perturbation keeps the Wiener-Hopf factors well separated
      Loop m = Loop::constant(CMatrix::Identity(f, f));
      for (int k = -1; k <= 1; ++k) m.add(k, 0.05 / f * rmat(f));
      return a * m;
    };
    const Loop ap = ray(), am = ray();
    ProjectionSpec p1 = ProjectionSpec::bundle(Loop::constant(p)), p2 = p1;
    for (int k = rint(0, 2); k > 0; --k) p1.remove.push_back({rint(-3, 3), rint(0, r - 1)});
    if (r < f)
      for (int k = rint(0, 2); k > 0; --k) p2.add.push_back({rint(-3, 3), rint(r, f - 1)});
    // distinct modes only
    auto dedupe = [](std::vector<std::pair<int, int>>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end(), [](auto a, auto b) { return a.first == b.first; }), v.end());
    };
    dedupe(p1.remove);
    dedupe(p2.add);
    char name[32];
    std::snprintf(name, sizeof name, "random-%02d", c);
    out.push_back({make_triple(name, MatrixSymbol(ap, am), p1, p2), std::nullopt});
  }
  return out;
}

inline std::vector<TripleFixture> builtin_prop3() {
  using PS = ProjectionSpec;
  const PS one = PS::bundle(Loop::identity(1));
  const PS coord = PS::bundle(const_diag({1.0, 0.0}));
  std::vector<TripleFixture> out;
  out.push_back({make_triple("minus-one", MatrixSymbol(diag_loop({zpow(1), zpow(0)}), Loop::identity(2)), coord, coord), -1});
  out.push_back({make_triple("identity", MatrixSymbol::even(Loop::identity(1)), one, one), 0});
  out.push_back({make_triple("finite-3-2", MatrixSymbol::even(Loop::identity(1)), PS::finite(1, 0, 2), PS::finite(1, 0, 1)), 1});
  PS removed = one;
  removed.remove = {{0, 0}};
  out.push_back({make_triple("shift-removed", MatrixSymbol(zpow(1), Loop::identity(1)), removed, one), -2});
  return out;
}

inline Poly quad(double c0, double c1, double c2) { return Poly{{c0, c1, c2}}; }

inline std::vector<ModelFixture> builtin_eta_models() {
  return {{"n2", {{quad(0, 0, 1)}}, 0.0, std::nullopt},
          {"n2-minus-quarter", {{quad(-0.25, 0, 1)}}, -1.0, std::nullopt},
          {"n2-plus-one", {{quad(1, 0, 1)}}, 0.0, std::nullopt}};
}

inline std::vector<ModelFixture> builtin_prop4_models() {
  return {{"n2-minus-quarter", {{quad(-0.25, 0, 1)}}, std::nullopt, -1},
          {"n2-plus-one", {{quad(1, 0, 1)}}, std::nullopt, 0},
          {"n2", {{quad(0, 0, 1)}}, std::nullopt, 0},
          {"minus-n2-plus-3", {{quad(3, 0, -1)}}, std::nullopt, 3},
          {"n2-minus-2.5", {{quad(-2.5, 0, 1)}}, std::nullopt, -3},
          {"2n2-plus-n-minus-1", {{quad(-1, 1, 2)}}, std::nullopt, -1},
          {"two-slot", {{quad(-0.25, 0, 1), quad(0.5, 0, -1)}}, std::nullopt, 0}};
}

inline DiagonalFamily make_family(std::string name, std::vector<FamilySlot> slots) {
  DiagonalFamily f;
  f.name = std::move(name);
  f.slots = std::move(slots);
  return f;
}

inline Profile linear(double from, double to) {
  Profile p;
  p.kind = Profile::Kind::Linear;
  p.from = from;
  p.to = to;
  return p;
}

inline Profile sine(double offset, double amplitude, double phase) {
  Profile p;
  p.kind = Profile::Kind::Sine;
  p.offset = offset;
  p.amplitude = amplitude;
  p.phase = phase;
  return p;
}

inline std::vector<FamilyFixture> builtin_families() {
  return {
      {make_family("shift", {{Poly{{0.0, 1.0}}, 1.0, linear(0.0, 1.0)}}), 1},
      {make_family("constant", {{quad(1, 0, 1), 0.0, linear(0.0, 1.0)}}), 0},
      {make_family("even-periodic", {{quad(-1, 0, 1), -1.0, sine(0.0, 0.5, 0.7)}}), 0},
      {make_family("descending", {{quad(0, 0, 1), -1.0, linear(0.5, 1.5)}}), -2},
      {make_family("two-slot-periodic", {{quad(-2, 0, 1), 1.0, sine(0.0, 0.8, 0.3)}, {quad(3, 0, -1), 1.0, sine(0.0, 0.8, 1.3)}}), 0},
  };
}

inline io::ProblemSpec dt5_spec(std::string name, int removed, int added, int zero_block) {
  io::ProblemSpec p;
  p.name = std::move(name);
  p.dt5 = true;
  p.removed = removed;
  p.added = added;
  p.zero_block = zero_block;
  return p;
}

inline std::vector<ProblemFixture> builtin_theorem5() {
  std::vector<ProblemFixture> out;
  out.push_back({dt5_spec("dt5", 0, 0, 0), 0});
  for (int r = 1; r <= 3; ++r) {
    out.push_back({dt5_spec("dt5-remove-" + std::to_string(r), r, 0, 0), r});
    out.push_back({dt5_spec("dt5-add-" + std::to_string(r), 0, r, 0), -r});
  }
  out.push_back({dt5_spec("dt5-zero-block-2", 0, 0, 2), -2});
  return out;
}

inline io::ProblemSpec reduction_problem(std::string name, const std::vector<CMatrix>& d_plus, const std::vector<CMatrix>& d_minus,
                                         const CMatrix& b, ProjectionSpec p) {
  io::ProblemSpec s;
  s.name = std::move(name);
  s.ns = NormalSymbol::constant(d_plus, d_minus);
  s.B = MatrixSymbol::even(Loop::constant(b));
  s.P = std::move(p);
  return s;
}

inline std::vector<ProblemFixture> builtin_reductions() {
  using PS = ProjectionSpec;
  const CMatrix one = CMatrix::Identity(1, 1), zero = CMatrix::Zero(1, 1);
  const PS p1 = PS::bundle(Loop::identity(1));
  std::vector<ProblemFixture> out;
  // tau^2 + 1 (from -dt^2 + Lambda^2)
  const std::vector<CMatrix> lap = {one, zero, one};
  out.push_back({reduction_problem("laplace-dirichlet", lap, lap, cmat(1, 2, {1.0, 0.0}), p1), 0});
  PS p1r = p1;
  p1r.remove = {{0, 0}};
  out.push_back({reduction_problem("laplace-dirichlet-removed", lap, lap, cmat(1, 2, {1.0, 0.0}), p1r), 1});
  PS p1rr = p1;
  p1rr.remove = {{-1, 0}, {2, 0}};
  out.push_back({reduction_problem("laplace-neumann-removed-2", lap, lap, cmat(1, 2, {0.0, 1.0}), p1rr), 2});
  // diag(tau + i, -tau + i), Dirichlet on the minus summand
  const std::vector<CMatrix> ex1 = {cmat(2, 2, {kI, 0.0, 0.0, kI}), cmat(2, 2, {1.0, 0.0, 0.0, -1.0})};
  out.push_back({reduction_problem("example1-dirichlet", ex1, ex1, cmat(1, 2, {0.0, 1.0}), p1), 0});
  // tau + diag(2i, -3i)
  const std::vector<CMatrix> cal = {cmat(2, 2, {cplx(0, 2), 0.0, 0.0, cplx(0, -3)}), CMatrix::Identity(2, 2)};
  out.push_back({reduction_problem("calderon-diagonal", cal, cal, cmat(1, 2, {0.0, 1.0}), p1), 0});
  // tau + S diag(1 - i, -1 + 2i) S^{-1}, non-normal
  const CMatrix s = cmat(2, 2, {1.0, 0.7, 0.2, 1.0});
  const CMatrix gen = s * cmat(2, 2, {cplx(1, -1), 0.0, 0.0, cplx(-1, 2)}) * s.inverse();
  out.push_back({reduction_problem("generic-removed", {gen, CMatrix::Identity(2, 2)}, {gen, CMatrix::Identity(2, 2)},
                                   cmat(1, 2, {1.0, 1.0}), p1r), 1});
  // ray-dependent first-order symbol
  const CMatrix genm = s.adjoint() * cmat(2, 2, {cplx(2, -0.5), 0.0, 0.0, cplx(0.5, 1.5)}) * s.adjoint().inverse();
  out.push_back({reduction_problem("ray-dependent", {gen, CMatrix::Identity(2, 2)}, {genm, CMatrix::Identity(2, 2)},
                                   cmat(1, 2, {1.0, -0.5}), p1), 0});
  // (tau + i)^2: no decaying solutions, zero boundary data
  const std::vector<CMatrix> sq = {-one, cplx(0, 2) * one, one};
  out.push_back({reduction_problem("plus-factor-squared", sq, sq, cmat(1, 2, {0.0, 0.0}), PS::bundle(Loop::zero(1, 1))), 0});
  // diag(tau^2 + 1, tau^2 + 4), Dirichlet on slot 0, Neumann on slot 1
  const std::vector<CMatrix> two = {cmat(2, 2, {1.0, 0.0, 0.0, 4.0}), CMatrix::Zero(2, 2), CMatrix::Identity(2, 2)};
  PS p2r = PS::bundle(Loop::identity(2));
  p2r.remove = {{1, 1}};
  out.push_back({reduction_problem("fiber2-mixed-removed", two, two, cmat(2, 4, {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0}), p2r), 1});
  // d/dt + (2p - 1) with p = diag(1, 0), boundary operator p onto Im P
  const std::vector<CMatrix> spec = {cmat(2, 2, {1.0, 0.0, 0.0, -1.0}), cmat(2, 2, {kI, 0.0, 0.0, kI})};
  out.push_back({reduction_problem("spectral-input", spec, spec, cmat(2, 2, {1.0, 0.0, 0.0, 0.0}), PS::bundle(const_diag({1.0, 0.0}))), 0});
  return out;
}

inline std::vector<CongruenceFixture> builtin_congruence() {
  std::vector<CongruenceFixture> out;
  out.push_back({"bundle-identity", [](int N) { return bundle_projection(Loop::identity(1), N); }, std::nullopt, std::nullopt});
  EigenModel quarter{{quad(-0.25, 0, 1)}};
  out.push_back({"spectral-quarter", [quarter](int N) { return nonneg_spectral_projection(quarter.op(N)); }, quarter, std::nullopt});
  Loop v(1, 2);
  v.set(1, cmat(1, 2, {0.5, cplx(0, -0.5)}));
  v.set(-1, cmat(1, 2, {0.5, cplx(0, 0.5)}));
  // sigma = v^T = (cos x, sin x), restricted to Im p this is the unit frame
  out.push_back({"real-line", [](int N) { return bundle_projection(real_line(), N); }, std::nullopt, Trivialization{v, v}});
  out.push_back({"rotating-line", [](int N) { return bundle_projection(rotating_line(), N); }, std::nullopt, std::nullopt});
  return out;
}

// ---------------------------------------------------------------------------
// Conversions shared with the CLI
// ---------------------------------------------------------------------------

inline Json theorem2_json(const Theorem2Report& r) {
  return {{"ind_a", r.ind_a}, {"ind_a_values", r.ind_a_values}, {"ind_t", r.ind_t.str()}, {"d", r.d.str()},
          {"d1", r.d1.str()}, {"d2", r.d2.str()}, {"theorem2_holds", r.holds}, {"N_levels", r.levels}};
}

inline Json eta_json(const EtaReport& e) {
  return {{"eta0", e.eta0},           {"dim_ker", e.dim_ker},     {"eta_reduced", e.eta_reduced},
          {"tail_order", e.tail_order}, {"head_cutoff", e.head_cutoff}, {"residual", e.residual}};
}

inline Json sf_json(const SpectralFlowReport& r) {
  return {{"sf_tracking", r.sf_tracking}, {"sf_sections", r.sf_sections}, {"agree", r.agree},
          {"samples", r.samples},         {"shifted", r.shifted},         {"crossings", r.crossings}};
}

inline Json trace_json(const HomotopyTrace& t) {
  return {{"step", t.step},           {"params", t.params},       {"margins", t.margins},
          {"lminus_dims", t.lminus_dims}, {"max_defect", t.max_defect}, {"certified", t.certified},
          {"note", t.note}};
}

inline Json bvp_json(const BvpIndexReport& r) {
  return {{"index", r.index}, {"ker", r.ker}, {"coker", r.coker}, {"route", r.route}, {"fd_agree", r.fd_agree}};
}

inline Json lopatinskii_json(const LopatinskiiCertificate& c) {
  return {{"elliptic", c.elliptic}, {"min_singular", c.min_singular}, {"worst_x", c.worst_x}, {"worst_ray", c.worst_ray},
          {"failure", c.failure}};
}

inline Json problem_json(const io::ProblemSpec& p) {
  if (p.dt5) return {{"name", p.name}, {"N", p.N}, {"dt5", {{"removed", p.removed}, {"added", p.added}, {"zero_block", p.zero_block}}}};
  Json coeffs = Json::array();
  for (auto& c : p.ns.d) coeffs.push_back(io::symbol_to_json(c));
  return {{"name", p.name},
          {"N", p.N},
          {"order", p.ns.order()},
          {"normalization", "-idt"},
          {"coeffs", coeffs},
          {"boundary", {{"B", io::symbol_to_json(p.B)}, {"P", io::projection_spec_to_json(p.P)}}}};
}

/// Spectral cylinder problem for verify-thm5: the built-in DT5 family, or a
/// first-order problem D = tau d1 + d0 read as d/dt + A with A = i d1^{-1} d0
/// (hermitian, x-independent), left condition P B u(0), right condition the
/// complementary spectral one.
inline CylinderProblem cylinder_from_problem(const io::ProblemSpec& p) {
  if (p.dt5) return dt5_problem(p.N, p.removed, p.added, p.zero_block);
  if (p.ns.order() != 1 || !p.ns.x_independent() || !p.B.is_x_independent())
    throw Error(ErrorKind::NotModeDecomposable, "verify-thm5 needs an x-independent first-order problem");
  auto a_of = [&](int sign) -> CMatrix {
    const auto d = p.ns.at(0.0, sign);
    return kI * d[1].partialPivLu().solve(d[0]);
  };
  const MatrixSymbol a(Loop::constant(a_of(+1)), Loop::constant(a_of(-1)), 1);
  CylinderProblem cp;
  cp.name = p.name;
  cp.A = tangential_operator(a, p.N);
  if (!cp.A.hermitian) throw Error(ErrorKind::InvalidArgument, "tangential operator is not hermitian");
  cp.tangential_symbol = a;
  cp.left.Q = p.P.build(p.N);
  cp.left.R = mode_constant(p.B, cp.left.Q.layout(), cp.A.layout);
  cp.right.Q = complement(nonneg_spectral_projection(cp.A));
  cp.right.R = cp.right.Q.matrix();
  return cp;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

struct SuiteOptions {
  std::vector<int> n_levels{24, 32, 48};
  std::uint64_t seed = 20240607;
  int random_count = 6;
  int sf_samples = 64;
  std::vector<std::string> fixtures;  // empty: builtin
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"eta", "prop3", "prop4", "reductions", "sf", "theorem2", "theorem5"};
  return names;
}

template <class Body>
CaseResult run_case(const std::string& suite, const std::string& name, Json inputs, Body body) {
  CaseResult c;
  c.suite = suite;
  c.name = name;
  c.inputs = std::move(inputs);
  try {
    body(c);
  } catch (const Error& e) {
    c.error = e.what();
  } catch (const std::exception& e) {
    c.error = std::string("internal: ") + e.what();
  }
  finalize(c);
  return c;
}

/// Fixture files hold one object or an array; an optional "expected" object
/// carries the reference values.
inline std::vector<std::pair<Json, std::string>> load_fixture_objects(const std::vector<std::string>& files) {
  std::vector<std::pair<Json, std::string>> out;
  for (const auto& f : files) {
    const Json j = io::read_file(f);
    if (j.is_array())
      for (size_t i = 0; i < j.size(); ++i) out.emplace_back(j[i], f + "#/" + std::to_string(i));
    else
      out.emplace_back(j, f + "#");
  }
  return out;
}

template <class T>
std::optional<T> expected(const Json& j, const std::string& key) {
  if (!j.contains("expected") || !j.at("expected").contains(key)) return std::nullopt;
  return j.at("expected").at(key).get<T>();
}

inline std::vector<CaseResult> suite_theorem2(const SuiteOptions& opt) {
  std::vector<TripleFixture> fx;
  if (opt.fixtures.empty()) {
    fx = builtin_triples();
    for (auto& r : random_triples(opt.seed, opt.random_count)) fx.push_back(r);
  } else {
    for (auto& [j, where] : load_fixture_objects(opt.fixtures)) fx.push_back({io::parse_triple(j, where), expected<int>(j, "ind_a")});
  }
  std::vector<CaseResult> out;
  for (const auto& f : fx) {
    Json in = io::triple_to_json(f.spec);
    in["N_levels"] = opt.n_levels;
    out.push_back(run_case("theorem2", f.spec.name, in, [&](CaseResult& c) {
      const Theorem2Report r = verify_theorem2(f.spec, opt.n_levels);
      c.computed = theorem2_json(r);
      c.checks["theorem2_holds"] = r.holds;
      c.checks["ind_t_half_integral"] = r.ind_t.den <= 2;
      if (f.ind_a) c.checks["ind_a_expected"] = r.ind_a == *f.ind_a;
    }));
  }
  return out;
}

inline std::vector<CaseResult> suite_prop3(const SuiteOptions& opt) {
  std::vector<TripleFixture> fx;
  if (opt.fixtures.empty()) fx = builtin_prop3();
  else
    for (auto& [j, where] : load_fixture_objects(opt.fixtures)) fx.push_back({io::parse_triple(j, where), expected<int>(j, "index")});
  std::vector<CaseResult> out;
  for (const auto& f : fx)
    for (int N : {opt.n_levels.front()}) {
      Json in = io::triple_to_json(f.spec);
      in["N"] = N;
      out.push_back(run_case("prop3", f.spec.name, in, [&](CaseResult& c) {
        const Prop3Report r = prop3_check(f.spec.build(N));
        c.computed = {{"bvp_index", r.bvp_index}, {"subspace_index", r.subspace_index}, {"route", r.route}};
        c.checks["equal"] = r.equal;
        if (f.ind_a) c.checks["index_expected"] = r.bvp_index == *f.ind_a;
      }));
    }
  return out;
}

inline std::vector<ModelFixture> model_fixtures(const SuiteOptions& opt, std::vector<ModelFixture> builtin) {
  if (opt.fixtures.empty()) return builtin;
  std::vector<ModelFixture> fx;
  for (auto& [j, where] : load_fixture_objects(opt.fixtures))
    fx.push_back({io::get_or<std::string>(j, "name", where, where), io::parse_model(j, where), expected<double>(j, "eta"),
                  expected<int>(j, "d")});
  return fx;
}

inline std::vector<CaseResult> suite_eta(const SuiteOptions& opt) {
  std::vector<CaseResult> out;
  for (const auto& f : model_fixtures(opt, builtin_eta_models())) {
    out.push_back(run_case("eta", f.name, io::model_to_json(f.model), [&](CaseResult& c) {
      const EtaReport r = eta_invariant(f.model);
      Json doubling = Json::array();
      bool stable = true;
      for (int m0 : {2 * f.model.M0, 4 * f.model.M0}) {
        EigenModel m = f.model;
        m.M0 = m0;
        const double e = eta_invariant(m).eta_reduced;
        doubling.push_back(e);
        stable = stable && std::abs(e - r.eta_reduced) <= 1e-6;
      }
      c.computed = eta_json(r);
      c.computed["eta_reduced_doubled_cutoffs"] = doubling;
      c.checks["residual_ok"] = r.residual < 1e-6;
      c.checks["cutoff_stable"] = stable;
      c.checks["half_integral"] = frac_distance(2.0 * r.eta_reduced) <= 1e-6;
      if (f.eta) c.checks["eta_expected"] = std::abs(r.eta_reduced - *f.eta) <= 1e-6;
    }));
  }
  if (!opt.fixtures.empty()) return out;
  // jump across the crossing of the n = +-1 modes
  {
    const EigenModel lo{{quad(-0.5, 0, 1)}}, hi{{quad(-1.5, 0, 1)}};
    out.push_back(run_case("eta", "jump-n2-minus-t", {{"from", io::model_to_json(lo)}, {"to", io::model_to_json(hi)}}, [&](CaseResult& c) {
      const double a = eta_invariant(lo).eta_reduced, b = eta_invariant(hi).eta_reduced;
      const int crossing = relative_index(nonneg_spectral_projection(hi.op(32)), nonneg_spectral_projection(lo.op(32)));
      c.computed = {{"eta_from", a}, {"eta_to", b}, {"jump", b - a}, {"relative_index", crossing}};
      c.checks["jump_is_relative_index"] = std::abs((b - a) - crossing) <= 1e-6;
      c.checks["jump_expected"] = std::abs((b - a) + 2.0) <= 1e-6;
    }));
  }
  for (const auto& f : builtin_congruence()) {
    out.push_back(run_case("eta", "congruence-" + f.name, {{"fixture", f.name}, {"N", 32}}, [&](CaseResult& c) {
      const ProjectionOperator p = f.build(32);
      std::optional<double> eta;
      if (f.model) eta = eta_invariant(*f.model).eta_reduced;
      const CongruenceReport r = eta_congruence(p, eta, f.triv);
      c.computed = {{"eta", r.eta}, {"eta_source", r.eta_source}, {"rhs", r.rhs}};
      c.checks["congruent"] = r.congruent;
      c.checks["half_integral"] = r.half_integral;
    }));
  }
  return out;
}

inline std::vector<CaseResult> suite_prop4(const SuiteOptions& opt) {
  std::vector<CaseResult> out;
  for (const auto& f : model_fixtures(opt, builtin_prop4_models())) {
    out.push_back(run_case("prop4", f.name, io::model_to_json(f.model), [&](CaseResult& c) {
      const Prop4Report r = check_prop4(f.model);
      c.computed = {{"d", r.d.str()}, {"eta", r.eta}, {"eta0", r.eta_report.eta0}, {"dim_ker", r.eta_report.dim_ker}};
      c.checks["equal"] = r.equal;
      c.checks["d_integer"] = r.d.is_integer();
      c.checks["half_integral"] = frac_distance(2.0 * r.eta) <= 1e-6;
      if (f.d) c.checks["d_expected"] = r.d == Rational(*f.d);
    }));
  }
  return out;
}

inline std::vector<CaseResult> suite_sf(const SuiteOptions& opt) {
  std::vector<FamilyFixture> fx;
  if (opt.fixtures.empty()) fx = builtin_families();
  else
    for (auto& [j, where] : load_fixture_objects(opt.fixtures)) fx.push_back({io::parse_family(j, where), expected<int>(j, "sf")});
  std::vector<CaseResult> out;
  for (const auto& f : fx) {
    Json slots = Json::array();
    for (auto& s : f.family.slots)
      slots.push_back({{"base", s.base.c},
                       {"shift", s.shift},
                       {"profile", s.profile.kind == Profile::Kind::Linear
                                       ? Json{{"kind", "linear"}, {"from", s.profile.from}, {"to", s.profile.to}}
                                       : Json{{"kind", "sine"}, {"offset", s.profile.offset}, {"amplitude", s.profile.amplitude}, {"phase", s.profile.phase}}}});
    const Json in = {{"name", f.family.name}, {"N", f.family.N}, {"slots", slots}, {"samples", opt.sf_samples}};
    out.push_back(run_case("sf", f.family.name, in, [&](CaseResult& c) {
      const SpectralFlowReport r = spectral_flow(f.family, opt.sf_samples);
      const bool periodic = f.family.periodic();
      c.computed = sf_json(r);
      c.computed["periodic"] = periodic;
      c.checks["methods_agree"] = r.agree;
      if (periodic) c.checks["periodic_zero"] = r.sf_tracking == 0;
      if (f.sf) c.checks["sf_expected"] = r.sf_tracking == *f.sf;
    }));
  }
  return out;
}

inline std::vector<ProblemFixture> problem_fixtures(const SuiteOptions& opt, std::vector<ProblemFixture> builtin) {
  if (opt.fixtures.empty()) return builtin;
  std::vector<ProblemFixture> fx;
  for (auto& [j, where] : load_fixture_objects(opt.fixtures)) fx.push_back({io::parse_problem(j, where), expected<int>(j, "index")});
  return fx;
}

inline std::vector<CaseResult> suite_theorem5(const SuiteOptions& opt) {
  std::vector<CaseResult> out;
  for (const auto& f : problem_fixtures(opt, builtin_theorem5())) {
    out.push_back(run_case("theorem5", f.spec.name, problem_json(f.spec), [&](CaseResult& c) {
      const Theorem5Report r = verify_theorem5(cylinder_from_problem(f.spec));
      c.computed = {{"lhs", r.lhs},
                    {"torus_levels", r.torus_levels},
                    {"torus_values", r.torus_values},
                    {"half_double", r.half_double.str()},
                    {"d", r.d.str()},
                    {"bvp", bvp_json(r.bvp)}};
      c.checks["equal"] = r.equal;
      c.checks["fd_agree"] = r.bvp.fd_agree;
      if (f.index) c.checks["lhs_expected"] = r.lhs == *f.index;
    }));
  }
  return out;
}

inline std::vector<CaseResult> suite_reductions(const SuiteOptions& opt) {
  std::vector<CaseResult> out;
  for (const auto& f : problem_fixtures(opt, builtin_reductions())) {
    out.push_back(run_case("reductions", f.spec.name, problem_json(f.spec), [&](CaseResult& c) {
      if (f.spec.dt5) throw Error(ErrorKind::InvalidArgument, "reductions need a symbol-level problem");
      const BoundaryData bd = f.spec.boundary();
      const LopatinskiiCertificate cert = check_lopatinskii(f.spec.ns, bd);
      if (!cert.elliptic) throw Error(ErrorKind::DefectiveBoundaryCondition, cert.failure);
      const ReductionChain ch = reduce_to_spectral(f.spec.ns, bd);
      Json steps = Json::array();
      bool samples = true;
      for (const auto& t : ch.traces) {
        steps.push_back({{"step", t.step}, {"samples", t.params.size()}, {"min_margin", t.margins.empty() ? 0.0 : *std::min_element(t.margins.begin(), t.margins.end())},
                         {"max_defect", t.max_defect}, {"certified", t.certified}});
        samples = samples && t.params.size() == 11 && t.certified;
      }
      c.computed = {{"input_index", ch.input_index},
                    {"reduced_index", ch.reduced_index},
                    {"normalized_index", ch.normalized_index},
                    {"endpoint_index", ch.endpoint_index},
                    {"identity_defect", ch.identity_defect},
                    {"endpoint", bvp_json(ch.endpoint_report)},
                    {"lopatinskii_min_singular", cert.min_singular},
                    {"traces", steps}};
      c.checks["index_invariant"] = ch.equal;
      c.checks["certified_11_samples"] = samples;
      c.checks["endpoint_identity"] = ch.identity_defect <= 1e-10;
      if (f.index) c.checks["index_expected"] = ch.input_index == *f.index;
    }));
  }
  return out;
}

inline Report run_suite(const std::string& name, const SuiteOptions& opt) {
  Report r;
  auto one = [&](const std::string& s) {
    if (s == "theorem2") r.append(suite_theorem2(opt));
    else if (s == "prop3") r.append(suite_prop3(opt));
    else if (s == "prop4") r.append(suite_prop4(opt));
    else if (s == "theorem5") r.append(suite_theorem5(opt));
    else if (s == "reductions") r.append(suite_reductions(opt));
    else if (s == "eta") r.append(suite_eta(opt));
    else if (s == "sf") r.append(suite_sf(opt));
    else throw Error(ErrorKind::InvalidArgument, "unknown suite '" + s + "'");
  };
  if (name == "all") {
    if (!opt.fixtures.empty()) throw Error(ErrorKind::InvalidArgument, "suite all runs builtin fixtures only");
    for (const auto& s : suite_names()) one(s);
  } else {
    one(name);
  }
  r.sort();
  return r;
}

}  // namespace evenproj
