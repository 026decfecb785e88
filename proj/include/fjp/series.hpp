#pragma once

// Formal power series in z truncated at a fixed order N, over exact
// rationals, doubles or complex doubles.

#include "fjp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace fjp {

namespace series_detail {

inline double scalar_sqrt(double x) {
  if (x < 0) throw std::domain_error("series sqrt: negative constant term");
  return std::sqrt(x);
}

inline std::complex<double> scalar_sqrt(const std::complex<double>& x) { return std::sqrt(x); }

/// Exact square root; throws std::domain_error unless x is the square of a rational.
inline Rational scalar_sqrt(const Rational& x) {
  if (x < 0) throw std::domain_error("series sqrt: negative constant term");
  const BigInt num = boost::multiprecision::sqrt(numerator(x));
  const BigInt den = boost::multiprecision::sqrt(denominator(x));
  if (num * num != numerator(x) || den * den != denominator(x)) {
    throw std::domain_error("series sqrt: constant term is not a rational square");
  }
  return Rational(num, den);
}

}  // namespace series_detail

template <class T>
class TruncatedSeries {
 public:
  TruncatedSeries() : c_(1, T(0)) {}
  explicit TruncatedSeries(unsigned order) : c_(order + 1, T(0)) {}
  /// Coefficients beyond `order` are dropped; missing ones are zero.
  TruncatedSeries(unsigned order, const std::vector<T>& coeffs) : c_(order + 1, T(0)) {
    const std::size_t n = std::min(coeffs.size(), c_.size());
    std::copy(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n), c_.begin());
  }

  static TruncatedSeries constant(unsigned order, const T& value) {
    TruncatedSeries s(order);
    s.c_[0] = value;
    return s;
  }
  /// The series z.
  static TruncatedSeries variable(unsigned order) {
    TruncatedSeries s(order);
    if (order >= 1) s.c_[1] = T(1);
    return s;
  }

  unsigned order() const { return static_cast<unsigned>(c_.size() - 1); }
  const std::vector<T>& coeffs() const { return c_; }
  const T& operator[](std::size_t n) const { return c_.at(n); }
  T& operator[](std::size_t n) { return c_.at(n); }

  TruncatedSeries& operator+=(const TruncatedSeries& other) {
    check_order(other);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
    return *this;
  }
  TruncatedSeries& operator-=(const TruncatedSeries& other) {
    check_order(other);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
    return *this;
  }
  TruncatedSeries& operator*=(const T& factor) {
    for (auto& v : c_) v *= factor;
    return *this;
  }
  TruncatedSeries& operator/=(const T& divisor) {
    for (auto& v : c_) v /= divisor;
    return *this;
  }

  friend TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs += rhs; }
  friend TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs -= rhs; }
  friend TruncatedSeries operator*(TruncatedSeries lhs, const T& rhs) { return lhs *= rhs; }
  friend TruncatedSeries operator*(const T& lhs, TruncatedSeries rhs) { return rhs *= lhs; }
  friend TruncatedSeries operator/(TruncatedSeries lhs, const T& rhs) { return lhs /= rhs; }
  TruncatedSeries operator-() const {
    TruncatedSeries out = *this;
    for (auto& v : out.c_) v = -v;
    return out;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& lhs, const TruncatedSeries& rhs) {
    lhs.check_order(rhs);
    TruncatedSeries out(lhs.order());
    const std::size_t n = lhs.c_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (lhs.c_[i] == T(0)) continue;
      for (std::size_t j = 0; i + j < n; ++j) out.c_[i + j] += lhs.c_[i] * rhs.c_[j];
    }
    return out;
  }

  friend bool operator==(const TruncatedSeries&, const TruncatedSeries&) = default;

  /// d/dz; the top coefficient of the result is zero (unknown past order N-1).
  TruncatedSeries derivative() const {
    TruncatedSeries out(order());
    for (std::size_t i = 1; i < c_.size(); ++i) out.c_[i - 1] = c_[i] * T(static_cast<int>(i));
    return out;
  }

  /// z d/dz, exact through order N.
  TruncatedSeries euler_derivative() const {
    TruncatedSeries out(order());
    for (std::size_t i = 1; i < c_.size(); ++i) out.c_[i] = c_[i] * T(static_cast<int>(i));
    return out;
  }

  /// 1/f; throws std::domain_error when f(0) = 0.
  TruncatedSeries reciprocal() const {
    if (c_[0] == T(0)) throw std::domain_error("series reciprocal: zero constant term");
    TruncatedSeries out(order());
    const T inv0 = T(1) / c_[0];
    out.c_[0] = inv0;
    for (std::size_t n = 1; n < c_.size(); ++n) {
      T acc = T(0);
      for (std::size_t i = 1; i <= n; ++i) acc += c_[i] * out.c_[n - i];
      out.c_[n] = -acc * inv0;
    }
    return out;
  }

  /// Principal square root; f(0) must have a square root in T.
  TruncatedSeries sqrt() const {
    TruncatedSeries out(order());
    out.c_[0] = series_detail::scalar_sqrt(c_[0]);
    if (out.c_[0] == T(0)) throw std::domain_error("series sqrt: zero constant term");
    const T twice = T(2) * out.c_[0];
    for (std::size_t n = 1; n < c_.size(); ++n) {
      T acc = c_[n];
      for (std::size_t i = 1; i < n; ++i) acc -= out.c_[i] * out.c_[n - i];
      out.c_[n] = acc / twice;
    }
    return out;
  }

  /// f(g(z)) for g(0) = 0, by Horner's scheme in series arithmetic.
  TruncatedSeries compose(const TruncatedSeries& inner) const {
    check_order(inner);
    if (inner.c_[0] != T(0)) throw std::domain_error("series compose: inner series must vanish at 0");
    TruncatedSeries out(order());
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      out = out * inner;
      out.c_[0] += *it;
    }
    return out;
  }

  /// Partial sum at a point, by Horner's scheme.
  template <class U>
  U evaluate(const U& z) const {
    U acc = U(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + U(*it);
    return acc;
  }

  template <class U, class F>
  TruncatedSeries<U> map(F&& convert) const {
    std::vector<U> out;
    out.reserve(c_.size());
    for (const auto& v : c_) out.push_back(convert(v));
    return TruncatedSeries<U>(order(), out);
  }

 private:
  void check_order(const TruncatedSeries& other) const {
    if (other.c_.size() != c_.size()) throw std::invalid_argument("series order mismatch");
  }

  std::vector<T> c_;
};

using RationalSeries = TruncatedSeries<Rational>;
using RealSeries = TruncatedSeries<double>;

inline RealSeries to_real(const RationalSeries& s) {
  return s.map<double>([](const Rational& v) { return to_double(v); });
}

}  // namespace fjp
