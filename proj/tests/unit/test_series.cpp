#include "fjp/series.hpp"

#include <catch_amalgamated.hpp>
#include <oracles.hpp>

using namespace fjp;

namespace {

RationalSeries geometric(unsigned order) {
  RationalSeries s(order);
  for (unsigned n = 0; n <= order; ++n) s[n] = 1;
  return s;
}

}  // namespace

TEST_CASE("series arithmetic") {
  const auto z = RationalSeries::variable(6);
  const auto one = RationalSeries::constant(6, Rational(1));
  CHECK((one - z) * geometric(6) == one);
  CHECK((one - z).reciprocal() == geometric(6));
  const auto sq = geometric(6) * geometric(6);
  for (unsigned n = 0; n <= 6; ++n) CHECK(sq[n] == Rational(n + 1));
  CHECK(geometric(6).derivative()[2] == 3);
  CHECK(geometric(6).derivative()[6] == 0);
  CHECK(geometric(6).euler_derivative()[4] == 4);
  CHECK((-z)[1] == -1);
  CHECK_THROWS_AS(z.reciprocal(), std::domain_error);
  CHECK_THROWS_AS(z + RationalSeries::variable(5), std::invalid_argument);
}

TEST_CASE("square root of the Catalan equation") {
  // sqrt(1 - 4z) = 1 - 2 sum C_{n-1} z^n
  RationalSeries f(10);
  f[0] = 1;
  f[1] = -4;
  const auto r = f.sqrt();
  CHECK(r * r == f);
  for (unsigned n = 1; n <= 10; ++n) CHECK(r[n] == Rational(-2 * oracle::catalan(n - 1)));
  RationalSeries g(4);
  g[0] = 2;
  CHECK_THROWS_AS(g.sqrt(), std::domain_error);
  RealSeries h(4, {2.0, 1.0});
  const auto hr = h.sqrt();
  const auto back = hr * hr;
  for (unsigned n = 0; n <= 4; ++n) CHECK(std::abs(back[n] - h[n]) < 1e-15);
}

TEST_CASE("composition and evaluation") {
  const auto z = RationalSeries::variable(8);
  // 1/(1-w) with w = z/(1+z) gives 1 + z
  const auto w = z * (RationalSeries::constant(8, Rational(1)) + z).reciprocal();
  const auto c = geometric(8).compose(w);
  CHECK(c[0] == 1);
  CHECK(c[1] == 1);
  for (unsigned n = 2; n <= 8; ++n) CHECK(c[n] == 0);
  CHECK_THROWS_AS(geometric(8).compose(geometric(8)), std::domain_error);
  const auto real = to_real(geometric(30));
  CHECK(std::abs(real.evaluate(0.25) - 4.0 / 3.0) < 1e-15);
  const auto zc = real.evaluate(std::complex<double>(0, 0.5));
  CHECK(std::abs(zc - 1.0 / std::complex<double>(1, -0.5)) < 1e-9);
}
