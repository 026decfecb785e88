#pragma once

// Reduction engine for words in two symbols a, b obeying
//   a^2 = (k-2) a + (k-1) 1,   b^2 = (k-2) b + (k-1) 1,
// with coefficients kept as exact polynomials in the symbol k.

#include "fjp/exact.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fjp {

/// Polynomial in k with integer coefficients; coeffs()[i] multiplies k^i.
/// The zero polynomial has no coefficients.
class KPoly {
 public:
  KPoly() = default;
  KPoly(long long constant);  // NOLINT(google-explicit-constructor): integers embed in Z[k]
  explicit KPoly(BigInt constant);
  explicit KPoly(std::vector<BigInt> coeffs);

  /// The indeterminate k.
  static KPoly k();

  const std::vector<BigInt>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  BigInt coefficient(std::size_t power) const;

  BigInt evaluate(const BigInt& k) const;
  Rational evaluate(const Rational& k) const;

  KPoly& operator+=(const KPoly& other);
  KPoly& operator-=(const KPoly& other);
  KPoly& operator*=(const KPoly& other);
  friend KPoly operator+(KPoly lhs, const KPoly& rhs) { return lhs += rhs; }
  friend KPoly operator-(KPoly lhs, const KPoly& rhs) { return lhs -= rhs; }
  friend KPoly operator*(KPoly lhs, const KPoly& rhs) { return lhs *= rhs; }
  KPoly operator-() const;
  friend bool operator==(const KPoly&, const KPoly&) = default;

  KPoly pow(unsigned exponent) const;

  /// Exact division by a nonzero integer. Throws std::domain_error when some
  /// coefficient is not divisible.
  KPoly divided_by(const BigInt& divisor) const;

  /// "c0+c1*k+c2*k^2" with zero terms omitted; "0" for the zero polynomial.
  std::string to_string() const;
  static KPoly parse(std::string_view text);

 private:
  void normalize();
  std::vector<BigInt> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const KPoly& p);

/// Canonical basis labels: 1, (ab)^j, (ba)^j (j >= 1), (ab)^j a, (ba)^j b (j >= 0).
enum class Basis { unit, ab, ba, aba, bab };

/// Linear combination over the canonical basis with KPoly coefficients.
/// Only nonzero coefficients are stored.
class WordElement {
 public:
  static WordElement one();
  static WordElement a();
  static WordElement b();

  const KPoly& unit() const { return unit_; }
  const std::map<unsigned, KPoly>& terms(Basis basis) const;
  KPoly coefficient(Basis basis, unsigned j) const;

  void add_term(Basis basis, unsigned j, const KPoly& coeff);

  WordElement& operator+=(const WordElement& other);
  friend WordElement operator+(WordElement lhs, const WordElement& rhs) { return lhs += rhs; }
  WordElement scaled(const KPoly& factor) const;
  friend bool operator==(const WordElement&, const WordElement&) = default;

  /// Right multiplication x * a, reduced with
  ///   (ab)^j a stays, ((ab)^j a) a = (k-2)(ab)^j a + (k-1)(ab)^j,
  ///   (ba)^j a = (k-2)(ba)^j + (k-1)(ba)^{j-1} b, ((ba)^j b) a = (ba)^{j+1}.
  WordElement mul_right_a() const;
  /// Right multiplication x * b, the mirror image of mul_right_a.
  WordElement mul_right_b() const;

 private:
  std::map<unsigned, KPoly>& terms_mut(Basis basis);

  KPoly unit_;
  std::map<unsigned, KPoly> ab_;
  std::map<unsigned, KPoly> ba_;
  std::map<unsigned, KPoly> aba_;
  std::map<unsigned, KPoly> bab_;
};

/// Coefficients of [(1+a)(1+b)]^n in the canonical basis:
///   m 1 + sum_{j=1}^n c_j (ab)^j + sum_{j=1}^{n-1} d_j (ba)^j
///       + sum_{j=0}^{n-1} e_j (ab)^j a + sum_{j=0}^{n-1} f_j (ba)^j b.
/// Vectors are indexed by j; c[0] and d[0] are unused zeros.
struct CoeffTable {
  unsigned n = 0;
  KPoly m;
  std::vector<KPoly> c;  // size n+1
  std::vector<KPoly> d;  // size n
  std::vector<KPoly> e;  // size n
  std::vector<KPoly> f;  // size n

  /// c_j with the convention c_j = 0 for j > n.
  KPoly c_at(unsigned j) const { return j < c.size() ? c[j] : KPoly(); }

  /// m = f_0 = e_0, c_j = f_{j-1} = e_{j-1}, d_j = c_{j+1}.
  bool symmetry_relations_hold() const;
};

inline constexpr unsigned kMaxJacobiPower = 64;

/// Expands [(1+a)(1+b)]^n by repeated right multiplication.
WordElement jacobi_word(unsigned n);

/// Splits an expanded word into its coefficient table. Throws
/// std::logic_error when a basis element outside the expected range appears
/// or when the symmetry relations fail.
CoeffTable coeff_table(const WordElement& word, unsigned n);

/// coeff_table(jacobi_word(n), n). Throws std::length_error above kMaxJacobiPower.
CoeffTable jacobi_power(unsigned n);

/// Tables for n = 1..n_max, sharing one incremental expansion.
std::vector<CoeffTable> jacobi_powers(unsigned n_max);

/// K_{n,0..n}: K_{n,0} = 2(k-1)(c_1 + (k-2) sum_{l=2}^n (k-1)^{l-2} c_l) and
/// K_{n,j} = c_j + c_{j+1} + 2(k-2) sum_{l=j+1}^n (k-1)^{l-j-1} c_l.
std::vector<KPoly> knj_from_table(const CoeffTable& table);

/// (k-1)^{n-j} binom(2n, n-j).
KPoly knj_closed_form(unsigned n, unsigned j);

/// Image of a word under the trace rules tau(1) = 1, tau((ab)^j) = tau((ba)^j) = tau_j,
/// tau((ab)^j a) = tau((ba)^j b) = (k-2) sum_{l=1}^j (k-1)^{j-l} tau_l.
/// `tau[j]` is the coefficient of tau_j; tau[0] is unused.
struct TraceForm {
  KPoly constant;
  std::vector<KPoly> tau;

  KPoly coefficient(unsigned j) const { return j < tau.size() ? tau[j] : KPoly(); }
};

TraceForm formal_trace(const WordElement& word);

/// The unit coefficient m_n of [(1+a)(1+b)]^n. The stationary moment is
/// m_n / k^{2n-1}.
KPoly stationary_from_words(unsigned n);

/// CSV with header n,term,j,coefficient; one row per stored coefficient.
void write_coeff_tables_csv(std::ostream& os, const std::vector<CoeffTable>& tables);

/// CSV with rows n and columns j = 0..n_max, cells "c0+c1*k+..." (empty
/// where j > n).
void write_k_triangle_csv(std::ostream& os, const std::vector<std::vector<KPoly>>& rows);

}  // namespace fjp
