#include "fjp/exact.hpp"

#include <catch_amalgamated.hpp>
#include <oracles.hpp>

using namespace fjp;

TEST_CASE("factorial and binomial against Pascal's triangle") {
  CHECK(factorial(0) == 1);
  CHECK(factorial(20) == BigInt("2432902008176640000"));
  for (unsigned n = 0; n <= 40; ++n) {
    for (unsigned k = 0; k <= n; ++k) CHECK(binomial(n, k) == oracle::binom(n, k));
  }
  CHECK(binomial(3, 5) == 0);
}

TEST_CASE("powers and rising factorials") {
  CHECK(ipow(BigInt(3), 0) == 1);
  CHECK(ipow(BigInt(-2), 5) == -32);
  CHECK(rpow(make_rational(2, 3), 3) == make_rational(8, 27));
  CHECK(pochhammer(make_rational(1, 2), 0) == 1);
  CHECK(pochhammer(make_rational(1, 2), 3) == make_rational(15, 8));
  CHECK(pochhammer(Rational(1), 6) == Rational(factorial(6)));
}

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("2/4") == make_rational(1, 2));
  CHECK(parse_rational("-3") == -3);
  CHECK(parse_rational(" 7/21 ") == make_rational(1, 3));
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK(to_string(make_rational(6, 4)) == "3/2");
  CHECK(to_string(Rational(5)) == "5");
  CHECK(to_double(make_rational(1, 4)) == 0.25);
}
