#pragma once

// Exact integer and rational arithmetic shared by the closed-form routes.

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace fjp {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

BigInt factorial(unsigned n);
BigInt binomial(unsigned n, unsigned k);
BigInt ipow(const BigInt& base, unsigned exponent);
Rational rpow(const Rational& base, unsigned exponent);

/// Rising factorial (x)_n = x(x+1)...(x+n-1).
Rational pochhammer(const Rational& x, unsigned n);

inline Rational make_rational(long long num, long long den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

/// Parses "p/q" or "p". Throws std::invalid_argument on malformed input or zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" rendering, or "p" when the denominator is one.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

}  // namespace fjp
