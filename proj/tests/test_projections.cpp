#include <catch_amalgamated.hpp>

#include <set>

#include "evenproj/projections.hpp"

using namespace evenproj;

namespace {

// Range of exp(ix) (1, exp(ix))^T / sqrt 2 style rotating line.
Loop rotating_line() {
  Loop p(2);
  p.set(0, 0.5 * CMatrix::Identity(2, 2));
  CMatrix up = CMatrix::Zero(2, 2), down = CMatrix::Zero(2, 2);
  up(1, 0) = 0.5;
  down(0, 1) = 0.5;
  p.set(1, up);
  p.set(-1, down);
  return p;
}

// Negative eigenvalues of diag(q(n)), |n| <= N, counted straight from q.
int negatives(const Poly& q, int N) {
  int c = 0;
  for (int n = -N; n <= N; ++n) c += q(n) < 0.0;
  return c;
}

}  // namespace

TEST_CASE("bundle projection of a rotating line is an orthogonal idempotent") {
  const ProjectionOperator p = bundle_projection(rotating_line(), 16);
  CHECK(p.even);
  CHECK(idempotency_defect(p.matrix()) < 1e-10);
  CHECK((p.matrix() - p.matrix().adjoint()).norm() < 1e-8);
  // interior columns agree with plain multiplication by p(x)
  const CMatrix mult = multiplication_matrix(rotating_line(), p.layout());
  for (int n = -4; n <= 4; ++n)
    for (int i = 0; i < 2; ++i) {
      const int c = p.layout().index(n, i);
      CHECK((p.matrix().col(c) - mult.col(c)).norm() < 1e-8);
    }
}

TEST_CASE("non-idempotent loops are rejected") {
  CHECK_THROWS_AS(bundle_projection(Loop::constant(2.0 * CMatrix::Identity(1, 1)), 8), Error);
}

TEST_CASE("relative index of mode projections is the signed count of exchanged modes") {
  // exchanged modes stay below the N/4 band where P - Q is checked for compactness
  const int N = 32;
  const std::set<int> s = {-3, 0, 1, 2, 5}, t = {0, 1, 4};
  auto in = [](const std::set<int>& set) { return [&set](int n) { return n > 6 || set.count(n) > 0; }; };
  const ProjectionOperator p = mode_projection(N, 1, in(s)), q = mode_projection(N, 1, in(t));
  int only_s = 0, only_t = 0;
  for (int n : s) only_s += t.count(n) == 0;
  for (int n : t) only_t += s.count(n) == 0;
  CHECK(relative_index(p, q) == only_s - only_t);
  CHECK(relative_index(q, p) == only_t - only_s);
}

TEST_CASE("relative index refuses non-compact differences") {
  CHECK_THROWS_AS(relative_index(hardy_projection(16), mode_projection(16, 1, [](int) { return true; })), Error);
}

TEST_CASE("d of a spectral projection counts negative eigenvalues") {
  for (double c : {0.25, 2.5, 7.0}) {
    const Poly q{{-c, 0.0, 1.0}};
    const ProjectionOperator p = nonneg_spectral_projection(fourier_diagonal(24, {q}));
    INFO("c = " << c);
    CHECK(d_dimension(p) == Rational(-negatives(q, 24)));
  }
}

TEST_CASE("d of a negative-leading spectral projection counts nonnegative eigenvalues") {
  const Poly q{{3.0, 0.0, -1.0}};
  const ProjectionOperator p = nonneg_spectral_projection(fourier_diagonal(24, {q}));
  // the symbol is 0, the reference projection vanishes
  CHECK(d_dimension(p) == Rational(2 * 24 + 1 - negatives(q, 24)));
}

TEST_CASE("adding and removing modes moves d by one") {
  const ProjectionOperator base = bundle_projection(rotating_line(), 16);
  CHECK(d_dimension(base) == Rational(0));
  const ProjectionOperator orth = orthogonalize(base);
  CHECK(d_dimension(remove_mode(orth, 2, 0)) == Rational(-1));
  CHECK(d_dimension(add_mode(coordinate_projection({0}, 2, 16), 1, 1)) == Rational(1));
}

TEST_CASE("normalization shifts d by r times the rank") {
  const ProjectionOperator p = coordinate_projection({0, 2}, 3, 12);
  CHECK(d_dimension(p, Normalization{Rational(1, 2)}) == Rational(1));
  CHECK(d_dimension(p, Normalization{Rational(-3)}) == Rational(-6));
}

TEST_CASE("d requires an even projection") {
  CHECK_THROWS_AS(d_dimension(hardy_projection(8)), Error);
}

TEST_CASE("direct sums add d") {
  const Poly q{{-2.5, 0.0, 1.0}};
  const ProjectionOperator a = nonneg_spectral_projection(fourier_diagonal(16, {q}));
  const ProjectionOperator b = add_mode(coordinate_projection({0}, 2, 16), 3, 1);
  const ProjectionOperator sum = direct_sum(a, b);
  CHECK(d_dimension(sum) == d_dimension(a) + d_dimension(b));
}

TEST_CASE("finite projections have zero symbol") {
  const ProjectionOperator f = finite_projection(10, 2, -1, 1);
  CHECK(f.even);
  CHECK(f.matrix().trace().real() == Catch::Approx(6.0));
  CHECK(d_dimension(f) == Rational(6));
}
