#include <catch_amalgamated.hpp>

#include <random>

#include "evenproj/subspace_index.hpp"
#include "evenproj/suites.hpp"

using namespace evenproj;

namespace {

Loop monomial(int k) { return Loop::scalar({{k, 1.0}}); }

ProjectionSpec scalar_identity() { return ProjectionSpec::bundle(Loop::identity(1)); }

TripleSpec triple(const std::string& name, MatrixSymbol a, ProjectionSpec p1, ProjectionSpec p2) {
  return {name, std::move(a), std::move(p1), std::move(p2)};
}

const std::vector<int> kLevels = {24, 32, 48};

}  // namespace

TEST_CASE("index_in_subspaces counts kernel and cokernel of a compressed shift") {
  // L e_n = e_{n+2} on 41 modes; windows |n| <= 10 avoid the section edges
  const ModeLayout lay{20, 1};
  const CMatrix l = multiplication_matrix(monomial(2), lay);
  const CMatrix id = CMatrix::Identity(lay.dim(), lay.dim());
  const auto w = lay.window(10);
  const KerCoker kc = index_in_subspaces(l, id, id, w, w);
  CHECK(kc.ker == 0);
  CHECK(kc.coker == 0);
  const CMatrix h = hardy_matrix(lay);
  const KerCoker toeplitz = index_in_subspaces(h * l * h, h, h, w, w);
  CHECK(toeplitz.ker == 0);
  CHECK(toeplitz.coker == 2);
}

TEST_CASE("index formula on monomial symbols with identity projections") {
  for (int p = -2; p <= 2; ++p)
    for (int m = -2; m <= 2; ++m) {
      const auto t = triple("mono", MatrixSymbol(monomial(p), monomial(m)), scalar_identity(), scalar_identity());
      const Theorem2Report r = verify_theorem2(t, kLevels);
      INFO("p = " << p << ", m = " << m);
      CHECK(r.ind_a == m - p);
      CHECK(r.holds);
    }
}

TEST_CASE("finite-rank changes of the projections shift the analytic index") {
  ProjectionSpec smaller = scalar_identity();
  smaller.remove = {{0, 0}, {3, 0}};
  ProjectionSpec larger = scalar_identity();
  const auto a = MatrixSymbol::even(Loop::identity(1));
  // identity from a codimension-2 subspace into everything: cokernel 2
  auto r = verify_theorem2(triple("remove-two", a, smaller, larger), kLevels);
  CHECK(r.ind_a == -2);
  CHECK(r.d == Rational(-2));
  CHECK(r.holds);
  r = verify_theorem2(triple("remove-two-reversed", a, larger, smaller), kLevels);
  CHECK(r.ind_a == 2);
  CHECK(r.holds);
}

TEST_CASE("finite projections give the difference of ranks") {
  const auto a = MatrixSymbol::even(Loop::identity(1));
  const auto r = verify_theorem2(triple("finite", a, ProjectionSpec::finite(1, -2, 2), ProjectionSpec::finite(1, 0, 1)), kLevels);
  // identity restricted to modes -2..2 and compressed to 0..1
  CHECK(r.ind_a == 5 - 2);
  CHECK(r.holds);
}

TEST_CASE("spectral projections with a shift symbol") {
  const std::vector<Poly> q = {Poly{{-2.5, 0.0, 1.0}}};
  const auto a = MatrixSymbol(monomial(1), Loop::identity(1));
  const auto r = verify_theorem2(triple("spectral-shift", a, ProjectionSpec::spectral(q), ProjectionSpec::spectral(q)), kLevels);
  CHECK(r.holds);
  // the two projections coincide so d vanishes and the index is the classical one
  CHECK(r.d == Rational(0));
  CHECK(r.ind_a == -1);
}

TEST_CASE("incompatible triples are rejected") {
  const SubspaceTriple t = triple("bad", MatrixSymbol::even(Loop::identity(1)), scalar_identity(), scalar_identity()).build(16);
  SubspaceTriple broken = t;
  broken.P2 = hardy_projection(16);
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("random corpus of twenty triples satisfies the index formula") {
  const auto corpus = random_triples(987654321ULL, 20);
  REQUIRE(corpus.size() == 20);
  int held = 0;
  for (const auto& f : corpus) {
    INFO(f.spec.name);
    const Theorem2Report r = verify_theorem2(f.spec, kLevels);
    CHECK(r.holds);
    CHECK(r.ind_t.den <= 2);
    held += r.holds;
  }
  CHECK(held == 20);
}

TEST_CASE("analytic index is stable across truncation levels") {
  const auto t = triple("z2-one", MatrixSymbol(monomial(2), Loop::identity(1)), scalar_identity(), scalar_identity());
  const StabilizedIndex s = analytic_index(t, {16, 24, 32, 48});
  for (int v : s.values) CHECK(v == -2);
}
