#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/zeta.hpp>

#include "evenproj/spectral.hpp"

using namespace evenproj;
using Catch::Approx;

namespace {

EigenModel model(std::vector<Poly> q) {
  EigenModel m;
  m.q = std::move(q);
  return m;
}

// sum_n sign(q(n)) |q(n)|^-s over |n| <= R plus the integral tail, valid for
// s deg > 1; the tail integral of |q|^-s ~ |lead|^-s n^(-s deg) is added on
// both sides.
double eta_direct(const Poly& q, double s, int R = 200000) {
  double sum = 0.0;
  for (int n = -R; n <= R; ++n) {
    const double v = q(n);
    if (v != 0.0) sum += (v > 0 ? 1.0 : -1.0) * std::pow(std::abs(v), -s);
  }
  const int m = q.degree();
  const double lead = q.leading();
  const double e = s * m;
  const double tail = std::pow(std::abs(lead), -s) * std::pow(R + 0.5, 1.0 - e) / (e - 1.0);
  const double plus_sign = lead > 0 ? 1.0 : -1.0;
  const double minus_sign = (m % 2 == 0) ? plus_sign : -plus_sign;
  return sum + (plus_sign + minus_sign) * tail;
}

// zeta_{|A|}(0) for the positive eigenvalues q(n) > 0 of an even quadratic
// law: the constant term of sum e^{-t q(n)} fitted in powers t^{j/2},
// j = -1..7, on small t.
double heat_constant_term(const Poly& q) {
  const int J = 9, T = 40;
  Eigen::MatrixXd a(T, J);
  Eigen::VectorXd b(T);
  for (int i = 0; i < T; ++i) {
    const double t = 0.001 + 0.001 * i;
    double h = 0.0;
    for (int n = -4000; n <= 4000; ++n)
      if (q(n) > 0.0) h += std::exp(-t * q(n));
    b(i) = h;
    for (int j = 0; j < J; ++j) a(i, j) = std::pow(t, 0.5 * (j - 1));
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return c(1);
}

int count_if_modes(const Poly& q, int R, bool (*pred)(double)) {
  int c = 0;
  for (int n = -R; n <= R; ++n) c += pred(q(n));
  return c;
}

}  // namespace

TEST_CASE("hurwitz zeta matches boost at a = 1, 1/2 and 2") {
  for (double s : {-2.5, -1.0, -0.5, 0.3, 2.0, 3.5}) {
    const double z = boost::math::zeta(s);
    INFO("s = " << s);
    CHECK(hurwitz_zeta(s, 1.0) == Approx(z).epsilon(1e-10));
    CHECK(hurwitz_zeta(s, 2.0) == Approx(z - 1.0).epsilon(1e-10).margin(1e-12));
    CHECK(hurwitz_zeta(s, 0.5) == Approx((std::pow(2.0, s) - 1.0) * z).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("eta function agrees with direct summation where the series converges") {
  for (const Poly& q : {Poly{{0.0, 0.0, 1.0}}, Poly{{-0.25, 0.0, 1.0}}, Poly{{-1.0, 1.0, 2.0}}, Poly{{3.0, 0.0, -1.0}}}) {
    for (double s : {1.5, 2.0}) {
      INFO("q = " << q.str() << ", s = " << s);
      CHECK(eta_function(model({q}), s) == Approx(eta_direct(q, s)).epsilon(1e-8));
    }
  }
}

TEST_CASE("eta at zero agrees with the heat-trace constant term") {
  for (const Poly& q : {Poly{{0.0, 0.0, 1.0}}, Poly{{-0.25, 0.0, 1.0}}, Poly{{1.0, 0.0, 1.0}}, Poly{{-2.5, 0.0, 1.0}}}) {
    const EtaReport r = eta_invariant(model({q}));
    const int neg = count_if_modes(q, 100, [](double v) { return v < 0.0; });
    const int ker = count_if_modes(q, 100, [](double v) { return v == 0.0; });
    // eta(0) = zeta_pos(0) - (number of negative eigenvalues)
    const double expected = heat_constant_term(q) - neg;
    INFO("q = " << q.str());
    CHECK(r.dim_ker == ker);
    CHECK(r.eta0 == Approx(expected).margin(1e-4));
  }
}

TEST_CASE("reduced eta of the reference models") {
  CHECK(eta_invariant(model({Poly{{0.0, 0.0, 1.0}}})).eta_reduced == Approx(0.0).margin(1e-6));
  CHECK(eta_invariant(model({Poly{{-0.25, 0.0, 1.0}}})).eta_reduced == Approx(-1.0).margin(1e-6));
  CHECK(eta_invariant(model({Poly{{1.0, 0.0, 1.0}}})).eta_reduced == Approx(0.0).margin(1e-6));
}

TEST_CASE("reduced eta is stable when the head cutoff doubles") {
  EigenModel m = model({Poly{{-2.5, 0.0, 1.0}}});
  const double base = eta_invariant(m).eta_reduced;
  m.M0 *= 2;
  CHECK(eta_invariant(m).eta_reduced == Approx(base).margin(1e-6));
}

TEST_CASE("d of the nonnegative spectral projection equals reduced eta") {
  for (const Poly& q : {Poly{{-0.25, 0.0, 1.0}}, Poly{{-2.5, 0.0, 1.0}}, Poly{{-1.0, 1.0, 2.0}}, Poly{{0.0, 0.0, 1.0}}, Poly{{1.0, 0.0, 1.0}}}) {
    const Prop4Report r = check_prop4(model({q}));
    INFO("q = " << q.str());
    CHECK(r.equal);
    CHECK(r.d == Rational(-count_if_modes(q, 100, [](double v) { return v < 0.0; })));
  }
}

TEST_CASE("odd-order models are outside the even class") {
  CHECK_THROWS_AS(check_prop4(model({Poly{{0.5, 1.0}}})), Error);
}

TEST_CASE("spectral flow of diagonal families matches endpoint counts") {
  auto family = [](Poly base, double shift, Profile prof) {
    DiagonalFamily f;
    f.slots.push_back({std::move(base), shift, prof});
    return f;
  };
  Profile up;
  up.from = 0.0;
  up.to = 1.0;
  const DiagonalFamily shift = family(Poly{{0.0, 1.0}}, 1.0, up);
  const SpectralFlowReport r = spectral_flow(shift);
  CHECK(r.agree);
  // endpoint oracle: nonnegative count grows by the flow
  auto nonneg_count = [](const DiagonalFamily& f, double t) {
    int c = 0;
    for (int n = -f.N; n <= f.N; ++n) c += f.at(t)[0](n) >= 0.0;
    return c;
  };
  CHECK(r.sf_tracking == 1);
  CHECK(r.sf_tracking == nonneg_count(shift, 1.0) - nonneg_count(shift, 0.0));

  Profile down;
  down.from = 0.5;
  down.to = 1.5;
  const DiagonalFamily desc = family(Poly{{0.0, 0.0, 1.0}}, -1.0, down);
  const SpectralFlowReport rd = spectral_flow(desc);
  CHECK(rd.agree);
  CHECK(rd.sf_tracking == nonneg_count(desc, 1.0) - nonneg_count(desc, 0.0));

  Profile wave;
  wave.kind = Profile::Kind::Sine;
  wave.amplitude = 0.5;
  wave.phase = 0.7;
  const DiagonalFamily periodic = family(Poly{{-1.0, 0.0, 1.0}}, -1.0, wave);
  REQUIRE(periodic.periodic());
  const SpectralFlowReport rp = spectral_flow(periodic);
  CHECK(rp.agree);
  CHECK(rp.sf_tracking == 0);
}

TEST_CASE("admissibility of lower-order terms") {
  MatrixSymbol s = MatrixSymbol::even(Loop::identity(1), 2);
  CHECK(is_admissible(s).admissible);
  s.lower_terms.push_back({1, Loop::identity(1), Loop::identity(1)});
  const AdmissibilityReport bad = is_admissible(s);
  CHECK_FALSE(bad.admissible);
  CHECK(bad.violation_degree == 1);
  s.lower_terms.back().minus = -1.0 * Loop::identity(1);
  CHECK(is_admissible(s).admissible);
}

TEST_CASE("congruence for a spectral projection with trivial range bundle") {
  const ProjectionOperator one = nonneg_spectral_projection(fourier_diagonal(24, {Poly{{-0.25, 0.0, 1.0}}}));
  const CongruenceReport r = eta_congruence(one, eta_invariant(model({Poly{{-0.25, 0.0, 1.0}}})).eta_reduced);
  CHECK(r.congruent);
  CHECK(r.half_integral);
}
