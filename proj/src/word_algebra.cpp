#include "fjp/word_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace fjp {

KPoly::KPoly(long long constant) : coeffs_{BigInt(constant)} { normalize(); }

KPoly::KPoly(BigInt constant) : coeffs_{std::move(constant)} { normalize(); }

KPoly::KPoly(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

KPoly KPoly::k() { return KPoly(std::vector<BigInt>{0, 1}); }

void KPoly::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

BigInt KPoly::coefficient(std::size_t power) const {
  return power < coeffs_.size() ? coeffs_[power] : BigInt(0);
}

BigInt KPoly::evaluate(const BigInt& k) const {
  BigInt value = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) value = value * k + *it;
  return value;
}

Rational KPoly::evaluate(const Rational& k) const {
  Rational value = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) value = value * k + Rational(*it);
  return value;
}

KPoly& KPoly::operator+=(const KPoly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  normalize();
  return *this;
}

KPoly& KPoly::operator-=(const KPoly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  normalize();
  return *this;
}

KPoly& KPoly::operator*=(const KPoly& other) {
  if (is_zero() || other.is_zero()) {
    coeffs_.clear();
    return *this;
  }
  std::vector<BigInt> product(coeffs_.size() + other.coeffs_.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) {
      product[i + j] += coeffs_[i] * other.coeffs_[j];
    }
  }
  coeffs_ = std::move(product);
  normalize();
  return *this;
}

KPoly KPoly::operator-() const {
  KPoly result = *this;
  for (auto& c : result.coeffs_) c = -c;
  return result;
}

KPoly KPoly::pow(unsigned exponent) const {
  KPoly result(1);
  KPoly base = *this;
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    exponent >>= 1U;
    if (exponent != 0) base *= base;
  }
  return result;
}

KPoly KPoly::divided_by(const BigInt& divisor) const {
  if (divisor == 0) throw std::domain_error("KPoly division by zero");
  std::vector<BigInt> out;
  out.reserve(coeffs_.size());
  for (const auto& c : coeffs_) {
    if (c % divisor != 0) throw std::domain_error("KPoly coefficient not divisible");
    out.push_back(c / divisor);
  }
  return KPoly(std::move(out));
}

std::string KPoly::to_string() const {
  if (is_zero()) return "0";
  std::string out;
  bool first = true;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const BigInt& c = coeffs_[i];
    if (c == 0) continue;
    if (c < 0) {
      out += "-";
      out += BigInt(-c).str();
    } else {
      if (!first) out += "+";
      out += c.str();
    }
    if (i == 1) out += "*k";
    if (i > 1) out += "*k^" + std::to_string(i);
    first = false;
  }
  return out;
}

KPoly KPoly::parse(std::string_view text) {
  std::vector<BigInt> coeffs;
  std::size_t pos = 0;
  auto fail = [&] { throw std::invalid_argument("malformed KPoly: " + std::string(text)); };
  auto read_digits = [&](std::string& into) {
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      into += text[pos++];
    }
    if (pos == start) fail();
  };
  if (text == "0") return KPoly();
  while (pos < text.size()) {
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
      negative = text[pos] == '-';
      ++pos;
    } else if (pos != 0) {
      fail();
    }
    std::string digits;
    read_digits(digits);
    std::size_t power = 0;
    if (pos < text.size() && text[pos] == '*') {
      if (pos + 1 >= text.size() || text[pos + 1] != 'k') fail();
      pos += 2;
      power = 1;
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        std::string exponent;
        read_digits(exponent);
        power = std::stoul(exponent);
      }
    }
    if (coeffs.size() <= power) coeffs.resize(power + 1, BigInt(0));
    BigInt value(digits);
    coeffs[power] += negative ? BigInt(-value) : value;
  }
  return KPoly(std::move(coeffs));
}

std::ostream& operator<<(std::ostream& os, const KPoly& p) { return os << p.to_string(); }

// ---------------------------------------------------------------------------

WordElement WordElement::one() {
  WordElement x;
  x.unit_ = KPoly(1);
  return x;
}

WordElement WordElement::a() {
  WordElement x;
  x.add_term(Basis::aba, 0, KPoly(1));
  return x;
}

WordElement WordElement::b() {
  WordElement x;
  x.add_term(Basis::bab, 0, KPoly(1));
  return x;
}

const std::map<unsigned, KPoly>& WordElement::terms(Basis basis) const {
  switch (basis) {
    case Basis::ab: return ab_;
    case Basis::ba: return ba_;
    case Basis::aba: return aba_;
    case Basis::bab: return bab_;
    case Basis::unit: break;
  }
  throw std::invalid_argument("unit has no indexed terms");
}

std::map<unsigned, KPoly>& WordElement::terms_mut(Basis basis) {
  return const_cast<std::map<unsigned, KPoly>&>(std::as_const(*this).terms(basis));
}

KPoly WordElement::coefficient(Basis basis, unsigned j) const {
  if (basis == Basis::unit) return unit_;
  const auto& map = terms(basis);
  auto it = map.find(j);
  return it == map.end() ? KPoly() : it->second;
}

void WordElement::add_term(Basis basis, unsigned j, const KPoly& coeff) {
  if (coeff.is_zero()) return;
  if (basis == Basis::unit) {
    unit_ += coeff;
    return;
  }
  if ((basis == Basis::ab || basis == Basis::ba) && j == 0) {
    unit_ += coeff;
    return;
  }
  auto& map = terms_mut(basis);
  auto [it, inserted] = map.emplace(j, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.is_zero()) map.erase(it);
  }
}

WordElement& WordElement::operator+=(const WordElement& other) {
  add_term(Basis::unit, 0, other.unit_);
  for (Basis basis : {Basis::ab, Basis::ba, Basis::aba, Basis::bab}) {
    for (const auto& [j, c] : other.terms(basis)) add_term(basis, j, c);
  }
  return *this;
}

WordElement WordElement::scaled(const KPoly& factor) const {
  WordElement out;
  out.add_term(Basis::unit, 0, unit_ * factor);
  for (Basis basis : {Basis::ab, Basis::ba, Basis::aba, Basis::bab}) {
    for (const auto& [j, c] : terms(basis)) out.add_term(basis, j, c * factor);
  }
  return out;
}

WordElement WordElement::mul_right_a() const {
  const KPoly km2 = KPoly::k() - KPoly(2);
  const KPoly km1 = KPoly::k() - KPoly(1);
  WordElement out;
  out.add_term(Basis::aba, 0, unit_);
  for (const auto& [j, c] : ab_) out.add_term(Basis::aba, j, c);
  for (const auto& [j, c] : ba_) {
    out.add_term(Basis::ba, j, km2 * c);
    out.add_term(Basis::bab, j - 1, km1 * c);
  }
  for (const auto& [j, c] : aba_) {
    out.add_term(Basis::aba, j, km2 * c);
    out.add_term(Basis::ab, j, km1 * c);  // j = 0 lands on the unit
  }
  for (const auto& [j, c] : bab_) out.add_term(Basis::ba, j + 1, c);
  return out;
}

WordElement WordElement::mul_right_b() const {
  const KPoly km2 = KPoly::k() - KPoly(2);
  const KPoly km1 = KPoly::k() - KPoly(1);
  WordElement out;
  out.add_term(Basis::bab, 0, unit_);
  for (const auto& [j, c] : ba_) out.add_term(Basis::bab, j, c);
  for (const auto& [j, c] : ab_) {
    out.add_term(Basis::ab, j, km2 * c);
    out.add_term(Basis::aba, j - 1, km1 * c);
  }
  for (const auto& [j, c] : bab_) {
    out.add_term(Basis::bab, j, km2 * c);
    out.add_term(Basis::ba, j, km1 * c);
  }
  for (const auto& [j, c] : aba_) out.add_term(Basis::ab, j + 1, c);
  return out;
}

// ---------------------------------------------------------------------------

bool CoeffTable::symmetry_relations_hold() const {
  if (n == 0) return true;
  if (c.size() != n + 1 || d.size() != n || e.size() != n || f.size() != n) return false;
  if (m != f[0] || m != e[0]) return false;
  for (unsigned j = 1; j <= n; ++j) {
    if (c[j] != f[j - 1] || c[j] != e[j - 1]) return false;
  }
  for (unsigned j = 1; j + 1 <= n; ++j) {
    if (d[j] != c[j + 1]) return false;
  }
  return true;
}

namespace {

WordElement times_one_plus_a_one_plus_b(const WordElement& x) {
  WordElement y = x + x.mul_right_a();
  return y + y.mul_right_b();
}

}  // namespace

WordElement jacobi_word(unsigned n) {
  if (n > kMaxJacobiPower) throw std::length_error("jacobi_word: n exceeds guard");
  WordElement x = WordElement::one();
  for (unsigned i = 0; i < n; ++i) x = times_one_plus_a_one_plus_b(x);
  return x;
}

CoeffTable coeff_table(const WordElement& word, unsigned n) {
  CoeffTable table;
  table.n = n;
  table.m = word.unit();
  table.c.assign(n + 1, KPoly());
  table.d.assign(n, KPoly());
  table.e.assign(n, KPoly());
  table.f.assign(n, KPoly());
  auto out_of_range = [n](const char* what, unsigned j) {
    return std::logic_error(std::string("unexpected basis element ") + what + " index " +
                            std::to_string(j) + " at n=" + std::to_string(n));
  };
  for (const auto& [j, c] : word.terms(Basis::ab)) {
    if (j < 1 || j > n) throw out_of_range("(ab)^j", j);
    table.c[j] = c;
  }
  for (const auto& [j, c] : word.terms(Basis::ba)) {
    if (j < 1 || j + 1 > n) throw out_of_range("(ba)^j", j);
    table.d[j] = c;
  }
  for (const auto& [j, c] : word.terms(Basis::aba)) {
    if (j >= n) throw out_of_range("(ab)^j a", j);
    table.e[j] = c;
  }
  for (const auto& [j, c] : word.terms(Basis::bab)) {
    if (j >= n) throw out_of_range("(ba)^j b", j);
    table.f[j] = c;
  }
  if (!table.symmetry_relations_hold()) {
    throw std::logic_error("coefficient symmetry relations violated at n=" + std::to_string(n));
  }
  return table;
}

CoeffTable jacobi_power(unsigned n) {
  if (n < 1) throw std::invalid_argument("jacobi_power: n must be >= 1");
  return coeff_table(jacobi_word(n), n);
}

std::vector<CoeffTable> jacobi_powers(unsigned n_max) {
  if (n_max > kMaxJacobiPower) throw std::length_error("jacobi_powers: n exceeds guard");
  std::vector<CoeffTable> tables;
  tables.reserve(n_max);
  WordElement x = WordElement::one();
  for (unsigned n = 1; n <= n_max; ++n) {
    x = times_one_plus_a_one_plus_b(x);
    tables.push_back(coeff_table(x, n));
  }
  return tables;
}

namespace {

std::vector<KPoly> powers_of(const KPoly& base, unsigned count) {
  std::vector<KPoly> powers(count + 1);
  powers[0] = KPoly(1);
  for (unsigned i = 1; i <= count; ++i) powers[i] = powers[i - 1] * base;
  return powers;
}

}  // namespace

std::vector<KPoly> knj_from_table(const CoeffTable& table) {
  const unsigned n = table.n;
  const KPoly km1 = KPoly::k() - KPoly(1);
  const KPoly km2 = KPoly::k() - KPoly(2);
  const auto p = powers_of(km1, n);
  std::vector<KPoly> K(n + 1);

  KPoly tail;
  for (unsigned l = 2; l <= n; ++l) tail += p[l - 2] * table.c_at(l);
  K[0] = KPoly(2) * km1 * (table.c_at(1) + km2 * tail);

  for (unsigned j = 1; j <= n; ++j) {
    KPoly sum;
    for (unsigned l = j + 1; l <= n; ++l) sum += p[l - j - 1] * table.c_at(l);
    K[j] = table.c_at(j) + table.c_at(j + 1) + KPoly(2) * km2 * sum;
  }
  return K;
}

KPoly knj_closed_form(unsigned n, unsigned j) {
  if (j > n) throw std::out_of_range("knj_closed_form: j > n");
  return (KPoly::k() - KPoly(1)).pow(n - j) * KPoly(binomial(2 * n, n - j));
}

TraceForm formal_trace(const WordElement& word) {
  const KPoly km1 = KPoly::k() - KPoly(1);
  const KPoly km2 = KPoly::k() - KPoly(2);
  unsigned top = 0;
  for (Basis basis : {Basis::ab, Basis::ba, Basis::aba, Basis::bab}) {
    if (!word.terms(basis).empty()) top = std::max(top, word.terms(basis).rbegin()->first);
  }
  const auto p = powers_of(km1, top);
  TraceForm form;
  form.constant = word.unit();
  form.tau.assign(top + 1, KPoly());
  for (Basis basis : {Basis::ab, Basis::ba}) {
    for (const auto& [j, c] : word.terms(basis)) form.tau[j] += c;
  }
  for (Basis basis : {Basis::aba, Basis::bab}) {
    for (const auto& [j, c] : word.terms(basis)) {
      for (unsigned l = 1; l <= j; ++l) form.tau[l] += km2 * p[j - l] * c;
    }
  }
  while (form.tau.size() > 1 && form.tau.back().is_zero()) form.tau.pop_back();
  return form;
}

KPoly stationary_from_words(unsigned n) {
  if (n < 1) throw std::invalid_argument("stationary_from_words: n must be >= 1");
  return jacobi_word(n).unit();
}

void write_coeff_tables_csv(std::ostream& os, const std::vector<CoeffTable>& tables) {
  os << "n,term,j,coefficient\n";
  for (const auto& t : tables) {
    os << t.n << ",m,0," << t.m << '\n';
    for (unsigned j = 1; j < t.c.size(); ++j) os << t.n << ",c," << j << ',' << t.c[j] << '\n';
    for (unsigned j = 1; j < t.d.size(); ++j) os << t.n << ",d," << j << ',' << t.d[j] << '\n';
    for (unsigned j = 0; j < t.e.size(); ++j) os << t.n << ",e," << j << ',' << t.e[j] << '\n';
    for (unsigned j = 0; j < t.f.size(); ++j) os << t.n << ",f," << j << ',' << t.f[j] << '\n';
  }
}

void write_k_triangle_csv(std::ostream& os, const std::vector<std::vector<KPoly>>& rows) {
  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.size());
  os << "n";
  for (std::size_t j = 0; j < width; ++j) os << ",j" << j;
  os << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << rows[r].size() - 1;
    for (std::size_t j = 0; j < width; ++j) {
      os << ',';
      if (j < rows[r].size()) os << rows[r][j];
    }
    os << '\n';
  }
}

}  // namespace fjp
