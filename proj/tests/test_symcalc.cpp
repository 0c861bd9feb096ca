#include <catch_amalgamated.hpp>

#include <set>

#include "evenproj/symcalc.hpp"

using namespace evenproj;
using Catch::Approx;

namespace {

Loop monomial(int k) { return Loop::scalar({{k, 1.0}}); }

// Index of e_n -> e_{n+p} (n >= 0), e_n -> e_{n+m} (n < 0) on l^2(Z), counted
// directly: kernel from colliding images, cokernel from uncovered targets.
int shift_index_by_counting(int p, int m) {
  const int R = 50;
  std::multiset<int> images;
  for (int n = -R; n <= R; ++n) images.insert(n >= 0 ? n + p : n + m);
  int ker = 0, coker = 0;
  for (int t = -R / 2; t <= R / 2; ++t) {
    const auto c = static_cast<int>(images.count(t));
    if (c == 0) ++coker;
    if (c > 1) ker += c - 1;
  }
  return ker - coker;
}

}  // namespace

TEST_CASE("loop evaluation matches the Fourier sum") {
  Loop l(2);
  CMatrix a(2, 2), b(2, 2);
  a << 1.0, 2.0, cplx(0, 1), -1.0;
  b << 0.5, 0.0, 0.0, cplx(0, -2);
  l.set(-1, a);
  l.set(3, b);
  for (double x : {0.0, 0.3, 1.7, 4.1}) {
    const CMatrix direct = std::exp(cplx(0, -x)) * a + std::exp(cplx(0, 3 * x)) * b;
    CHECK((l(x) - direct).norm() < 1e-13);
  }
  CHECK(l.support() == 3);
  CHECK(l.min_frequency() == -1);
  CHECK(l.max_frequency() == 3);
}

TEST_CASE("loop product convolves coefficients") {
  const Loop a = Loop::scalar({{1, 2.0}, {0, 1.0}});
  const Loop b = Loop::scalar({{-1, 1.0}, {2, cplx(0, 1)}});
  const Loop c = a * b;
  for (double x : {0.1, 2.2})
    CHECK(std::abs(c(x)(0, 0) - a(x)(0, 0) * b(x)(0, 0)) < 1e-13);
}

TEST_CASE("winding numbers of monomials") {
  for (int k = -3; k <= 3; ++k) CHECK(winding_number(monomial(k)) == k);
  CHECK(winding_number(Loop::scalar({{0, 2.0}, {1, 1.0}})) == 0);
  CHECK(winding_number(Loop::scalar({{0, 0.5}, {1, 1.0}})) == 1);
}

TEST_CASE("multiplication matrix shifts modes") {
  const ModeLayout lay{4, 1};
  const CMatrix m = multiplication_matrix(monomial(1), lay);
  for (int n = -4; n < 4; ++n) CHECK(m(lay.index(n + 1, 0), lay.index(n, 0)) == cplx(1.0));
  CHECK(m.col(lay.index(4, 0)).norm() == 0.0);
}

TEST_CASE("circle index of monomial symbols matches shift counting") {
  for (int p = -2; p <= 2; ++p)
    for (int m = -2; m <= 2; ++m) {
      const MatrixSymbol s(monomial(p), monomial(m));
      INFO("p = " << p << ", m = " << m);
      CHECK(circle_index(s).value == shift_index_by_counting(p, m));
    }
}

TEST_CASE("convention: z on the positive ray and 1 on the negative ray has index -1") {
  const MatrixSymbol s(monomial(1), Loop::identity(1));
  CHECK(circle_index(s).value == -1);
  CHECK(classical_index_t(s) == -1);
}

TEST_CASE("block-diagonal symbols add indices") {
  Loop plus(2), minus(2);
  plus.set(1, (CMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
  plus.set(-2, (CMatrix(2, 2) << 0.0, 0.0, 0.0, 1.0).finished());
  minus.set(0, CMatrix::Identity(2, 2));
  const MatrixSymbol s(plus, minus);
  CHECK(circle_index(s).value == shift_index_by_counting(1, 0) + shift_index_by_counting(-2, 0));
}

TEST_CASE("ellipticity detects vanishing determinants") {
  const MatrixSymbol good(Loop::scalar({{0, 2.0}, {1, 1.0}}), Loop::identity(1));
  CHECK(validate_elliptic(good).elliptic);
  CHECK(validate_elliptic(good).min_abs_det == Approx(1.0).margin(1e-6));
  const MatrixSymbol bad(Loop::scalar({{0, 1.0}, {1, 1.0}}), Loop::identity(1));
  CHECK_FALSE(validate_elliptic(bad).elliptic);
}

TEST_CASE("truncation below the symbol support is rejected") {
  const MatrixSymbol s(monomial(3), Loop::identity(1));
  CHECK_THROWS_AS(quantize_circle(s, 5), Error);
  CHECK_NOTHROW(quantize_circle(s, 6));
}

TEST_CASE("fourier_diagonal reports the normalized principal symbol") {
  const TruncatedOperator odd = fourier_diagonal(5, {Poly{{0.0, 1.0}}});
  CHECK(odd.symbol->a_plus.coeff(0)(0, 0) == cplx(1.0));
  CHECK(odd.symbol->a_minus.coeff(0)(0, 0) == cplx(-1.0));
  const TruncatedOperator even = fourier_diagonal(5, {Poly{{-1.0, 0.0, -2.0}}});
  CHECK(even.symbol->a_plus.coeff(0)(0, 0) == cplx(-1.0));
  CHECK(even.symbol->a_minus.coeff(0)(0, 0) == cplx(-1.0));
  CHECK(even.matrix(even.layout.index(2, 0), even.layout.index(2, 0)).real() == Approx(-9.0));
}

TEST_CASE("torus index of the identity and of a unitary multiplication is zero") {
  TorusSymbol one;
  one.value = [](double, double, double, double) { return CMatrix::Identity(1, 1); };
  one.position_dependent = false;
  CHECK(torus_index(one).value == 0);
  TorusSymbol phase;
  phase.value = [](double x, double, double, double) { return CMatrix::Constant(1, 1, std::exp(cplx(0, x))); };
  CHECK(torus_index(phase).value == 0);
}

TEST_CASE("rational arithmetic stays reduced") {
  const Rational a(1, 2), b(-3, 4);
  CHECK((a + b).str() == "-1/4");
  CHECK((a - b).str() == "5/4");
  CHECK(Rational(4, -8).str() == "-1/2");
  CHECK(Rational(3).is_integer());
}
