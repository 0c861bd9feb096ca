#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "evenproj/bvp.hpp"
#include "evenproj/suites.hpp"

using namespace evenproj;

namespace {

// Jets v_j = d^j u/dt^j / <n>^j of solutions of sum_k C_k <n>^(m-k) (-i d/dt)^k u = 0
// obey v' = <n> K v. Decaying jets are the directions that exp(K T) shrinks; T = 10 keeps the
// small singular values above roundoff of the large ones.
CMatrix decaying_jets(const std::vector<CMatrix>& c) {
  const int m = static_cast<int>(c.size()) - 1;
  const auto n = c.front().rows();
  std::vector<CMatrix> ck;
  for (int k = 0; k <= m; ++k) ck.push_back(std::pow(cplx(0, -1), k) * c[static_cast<size_t>(k)]);
  CMatrix K = CMatrix::Zero(m * n, m * n);
  for (int j = 0; j + 1 < m; ++j) K.block(j * n, (j + 1) * n, n, n).setIdentity();
  const CMatrix lead_inv = ck.back().inverse();
  for (int k = 0; k < m; ++k) K.block((m - 1) * n, k * n, n, n) = -lead_inv * ck[static_cast<size_t>(k)];
  const CMatrix flow = (10.0 * K).exp();
  Eigen::JacobiSVD<CMatrix> svd(flow, Eigen::ComputeFullV);
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) < 1.0) keep.push_back(static_cast<int>(i));
  return select_columns(svd.matrixV(), keep);
}

int rank_of(const CMatrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > 1e-6;
  return r;
}

// Sum over modes of (decaying solutions) - (boundary rank).
int half_cylinder_oracle(const NormalSymbol& ns, const BoundaryData& bd) {
  const ModeLayout& lay = bd.P.layout();
  const CMatrix splus = decaying_jets(ns.at(0.0, +1)), sminus = decaying_jets(ns.at(0.0, -1));
  int index = 0;
  for (int n = -lay.N; n <= lay.N; ++n) {
    const int sign = n >= 0 ? +1 : -1;
    const CMatrix& s = sign > 0 ? splus : sminus;
    const CMatrix pn = bd.P.matrix().block(lay.index(n, 0), lay.index(n, 0), lay.fiber, lay.fiber);
    const int boundary_dim = rank_of(pn);
    const int r = rank_of(pn * bd.B.ray(sign).coeff(0) * s);
    index += (static_cast<int>(s.cols()) - r) - (boundary_dim - r);
  }
  return index;
}

// Finite cylinder with mode-diagonal conditions: every mode has a full space
// of solutions u(t) = exp(-A t) u(0); the index is the fiber dimension minus
// the boundary ranks, summed over modes.
int finite_cylinder_oracle(const CylinderProblem& cp) {
  const ModeLayout& a = cp.A.layout;
  const ModeLayout& gl = cp.left.Q.layout();
  const ModeLayout& gr = cp.right.Q.layout();
  int index = 0;
  for (int n = -a.N; n <= a.N; ++n) {
    index += a.fiber;
    index -= rank_of(cp.left.Q.matrix().block(gl.index(n, 0), gl.index(n, 0), gl.fiber, gl.fiber));
    index -= rank_of(cp.right.Q.matrix().block(gr.index(n, 0), gr.index(n, 0), gr.fiber, gr.fiber));
  }
  return index;
}

}  // namespace

TEST_CASE("Cauchy data of tau^2 + 1 is spanned by the decaying exponential") {
  const CMatrix one = CMatrix::Identity(1, 1), zero = CMatrix::Zero(1, 1);
  const CauchyData cd = cauchy_data({one, zero, one});
  REQUIRE(cd.minus.cols() == 1);
  // u = e^{-t}: jets (1, -1) up to scale
  CMatrix expected(2, 1);
  expected << 1.0, -1.0;
  expected /= expected.norm();
  CHECK(subspace_distance(cd.minus, expected) < 1e-10);
  CHECK(cd.margin == Catch::Approx(1.0));
}

TEST_CASE("half-cylinder index agrees with the per-mode ODE count") {
  for (const auto& f : builtin_reductions()) {
    const BoundaryData bd = f.spec.boundary();
    INFO(f.spec.name);
    const KerCoker kc = half_cylinder_index(f.spec.ns, bd);
    CHECK(kc.index() == half_cylinder_oracle(f.spec.ns, bd));
    CHECK(kc.index() == f.index);
  }
}

TEST_CASE("Lopatinskii check rejects boundary data that misses the decaying solutions") {
  const CMatrix one = CMatrix::Identity(1, 1), zero = CMatrix::Zero(1, 1);
  const NormalSymbol lap = NormalSymbol::constant({one, zero, one});
  // u(0) + u'(0)/<n> annihilates e^{-<n> t}
  CMatrix robin(1, 2);
  robin << 1.0, 1.0;
  const BoundaryData bad{MatrixSymbol::even(Loop::constant(robin)), bundle_projection(Loop::identity(1), 16)};
  CHECK_FALSE(check_lopatinskii(lap, bad).elliptic);
  CMatrix dirichlet(1, 2);
  dirichlet << 1.0, 0.0;
  const BoundaryData good{MatrixSymbol::even(Loop::constant(dirichlet)), bundle_projection(Loop::identity(1), 16)};
  CHECK(check_lopatinskii(lap, good).elliptic);
}

TEST_CASE("order reduction preserves the index and certifies every sample") {
  for (const auto& f : builtin_reductions()) {
    if (f.spec.ns.order() < 2) continue;
    INFO(f.spec.name);
    const ReducedProblem r = reduce_order(f.spec.ns, f.spec.boundary());
    CHECK(r.ns.order() == 1);
    CHECK(r.trace.params.size() == 11);
    CHECK(r.trace.certified);
    CHECK(half_cylinder_index(r.ns, r.bd).index() == f.index);
  }
}

TEST_CASE("the reduction chain keeps the index at every stage") {
  for (const auto& f : builtin_reductions()) {
    INFO(f.spec.name);
    const ReductionChain ch = reduce_to_spectral(f.spec.ns, f.spec.boundary());
    CHECK(ch.certified);
    CHECK(ch.equal);
    CHECK(ch.input_index == f.index);
    CHECK(ch.endpoint_index == f.index);
    CHECK(ch.identity_defect < 1e-8);
  }
}

TEST_CASE("spectral problem index agrees with per-mode boundary counting") {
  for (auto [removed, added, zero_block] : std::vector<std::tuple<int, int, int>>{{0, 0, 0}, {2, 0, 0}, {0, 3, 0}, {0, 0, 2}, {1, 0, 1}}) {
    const CylinderProblem cp = dt5_problem(16, removed, added, zero_block);
    INFO("removed " << removed << " added " << added << " zero block " << zero_block);
    const BvpIndexReport r = spectral_bvp_index(cp);
    CHECK(r.index == finite_cylinder_oracle(cp));
    CHECK(r.index == removed - added - zero_block);
    CHECK(r.fd_agree);
  }
}

TEST_CASE("index formula on the spectral example") {
  for (auto [removed, added] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {3, 0}, {0, 2}}) {
    const Theorem5Report r = verify_theorem5(dt5_problem(16, removed, added));
    INFO("removed " << removed << " added " << added);
    CHECK(r.equal);
    CHECK(r.d == Rational(added - removed));
    for (int v : r.torus_values) CHECK(v == r.torus_values.front());
  }
}

TEST_CASE("doubled symbol is continuous across the seams") {
  const MatrixSymbol a = MatrixSymbol::even(Loop::constant((CMatrix(2, 2) << 1, 0, 0, -1).finished()), 1);
  const TorusSymbol ts = double_symbol(NormalSymbol::dt(a));
  CHECK(ts.seam_jump < 1e-12);
  CHECK(torus_symbol_margin(ts) > 0.1);
}

TEST_CASE("subspace index equals the boundary problem index") {
  for (const auto& f : builtin_prop3()) {
    INFO(f.spec.name);
    const Prop3Report r = prop3_check(f.spec.build(16));
    CHECK(r.equal);
    if (f.ind_a) CHECK(r.bvp_index == *f.ind_a);
  }
}
