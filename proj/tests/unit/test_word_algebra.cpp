#include "fjp/word_algebra.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>
#include <oracles.hpp>

#include <random>
#include <sstream>

using namespace fjp;

namespace {

KPoly oracle_closed_form(unsigned n, unsigned j) {
  // (k-1)^{n-j} binom(2n, n-j) expanded by the binomial theorem.
  const unsigned e = n - j;
  std::vector<BigInt> coeffs(e + 1);
  const BigInt scale = oracle::binom(2 * n, e);
  for (unsigned i = 0; i <= e; ++i) coeffs[i] = scale * oracle::binom(e, i) * ((e - i) % 2 ? -1 : 1);
  return KPoly(coeffs);
}

Eigen::MatrixXd random_projection(int dim, int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, rank);
  return q * q.transpose();
}

Eigen::MatrixXd mpow(const Eigen::MatrixXd& m, unsigned e) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  for (unsigned i = 0; i < e; ++i) out = out * m;
  return out;
}

}  // namespace

TEST_CASE("KPoly arithmetic") {
  const KPoly k = KPoly::k();
  const KPoly p = (k - 1) * (k - 1);
  CHECK(p.to_string() == "1-2*k+1*k^2");
  CHECK(KPoly::parse(p.to_string()) == p);
  CHECK(KPoly::parse("0").is_zero());
  CHECK(KPoly(0).is_zero());
  CHECK(p.degree() == 2);
  CHECK(p.evaluate(BigInt(4)) == 9);
  CHECK(p.evaluate(make_rational(1, 2)) == make_rational(1, 4));
  CHECK((k - 1).pow(3) == p * (k - 1));
  CHECK((p * 6).divided_by(BigInt(3)) == p * 2);
  CHECK_THROWS_AS(p.divided_by(BigInt(2)), std::domain_error);
  CHECK((p - p).is_zero());
  CHECK(-(-p) == p);
  std::ostringstream os;
  os << k;
  CHECK(os.str() == "1*k");
}

TEST_CASE("right multiplication rules") {
  const KPoly k = KPoly::k();
  const WordElement a = WordElement::one().mul_right_a();
  CHECK(a == WordElement::a());
  CHECK(a.coefficient(Basis::aba, 0) == 1);

  const WordElement aa = a.mul_right_a();
  CHECK(aa.unit() == k - 1);
  CHECK(aa.coefficient(Basis::aba, 0) == k - 2);

  // ((ab)^j a) b = (ab)^{j+1}
  WordElement x;
  x.add_term(Basis::aba, 2, KPoly(1));
  const WordElement y = x.mul_right_b();
  CHECK(y.coefficient(Basis::ab, 3) == 1);
  CHECK(y.unit().is_zero());

  // (ab)^j b = (k-2)(ab)^j + (k-1)(ab)^{j-1} a
  WordElement z;
  z.add_term(Basis::ab, 2, KPoly(1));
  const WordElement w = z.mul_right_b();
  CHECK(w.coefficient(Basis::ab, 2) == k - 2);
  CHECK(w.coefficient(Basis::aba, 1) == k - 1);
}

TEST_CASE("first coefficient tables") {
  const CoeffTable t1 = jacobi_power(1);
  CHECK(t1.m == 1);
  CHECK(t1.c[1] == 1);
  CHECK(t1.e[0] == 1);
  CHECK(t1.f[0] == 1);
  CHECK(t1.d.size() == 1);
  const KPoly k = KPoly::k();
  const CoeffTable t2 = jacobi_power(2);
  CHECK(t2.c[2] == 1);
  CHECK(t2.c[1] == 2 * k - 1);
  const auto tables = jacobi_powers(12);
  for (const auto& t : tables) {
    CHECK(t.c[t.n] == 1);
    CHECK(t.symmetry_relations_hold());
  }
  CHECK_THROWS_AS(jacobi_power(65), std::length_error);
}

TEST_CASE("coefficient recurrences") {
  const KPoly k = KPoly::k();
  const auto tables = jacobi_powers(21);
  for (unsigned n = 1; n < 21; ++n) {
    const auto& cur = tables[n - 1];
    const auto& next = tables[n];
    for (unsigned j = 2; j <= n + 1; ++j) {
      CHECK(next.c_at(j) == 2 * (k - 1) * cur.c_at(j) + cur.c_at(j - 1) + (k - 1) * (k - 1) * cur.c_at(j + 1));
    }
    const auto kn = knj_from_table(cur);
    const auto kn1 = knj_from_table(next);
    auto at = [](const std::vector<KPoly>& v, unsigned j) { return j < v.size() ? v[j] : KPoly(); };
    for (unsigned j = 1; j <= n + 1; ++j) {
      CHECK(kn1[j] == (k - 1) * (k - 1) * at(kn, j + 1) + 2 * (k - 1) * at(kn, j) + at(kn, j - 1));
    }
  }
}

TEST_CASE("K triangle equals the Catalan triangle") {
  const KPoly k = KPoly::k();
  CHECK(knj_from_table(jacobi_power(1))[0] == 2 * (k - 1));
  CHECK(knj_from_table(jacobi_power(2))[1] == 4 * (k - 1));
  CHECK(knj_closed_form(2, 1) == 4 * (k - 1));
  for (const auto& t : jacobi_powers(20)) {
    const auto row = knj_from_table(t);
    REQUIRE(row.size() == t.n + 1);
    CHECK(row[t.n] == 1);
    for (unsigned j = 0; j <= t.n; ++j) {
      CHECK(row[j] == oracle_closed_form(t.n, j));
      CHECK(knj_closed_form(t.n, j) == oracle_closed_form(t.n, j));
      // k = 2 collapses to binom(2n, n-j).
      CHECK(row[j].evaluate(BigInt(2)) == oracle::binom(2 * t.n, t.n - j));
    }
  }
}

TEST_CASE("expansion agrees with a matrix realization") {
  // a = kP - 1, b = kQ - 1 for projections P, Q satisfy the defining relations.
  std::mt19937_64 rng(7);
  const int dim = 12;
  const Eigen::MatrixXd P = random_projection(dim, 4, rng);
  const Eigen::MatrixXd Qm = random_projection(dim, 5, rng);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  for (unsigned kv : {3U, 4U}) {
    const Eigen::MatrixXd a = kv * P - I;
    const Eigen::MatrixXd b = kv * Qm - I;
    const Eigen::MatrixXd ab = a * b;
    const Eigen::MatrixXd ba = b * a;
    for (unsigned n = 1; n <= 6; ++n) {
      const WordElement word = jacobi_word(n);
      const BigInt kb(kv);
      Eigen::MatrixXd rebuilt = word.unit().evaluate(kb).convert_to<double>() * I;
      for (const auto& [j, c] : word.terms(Basis::ab)) rebuilt += c.evaluate(kb).convert_to<double>() * mpow(ab, j);
      for (const auto& [j, c] : word.terms(Basis::ba)) rebuilt += c.evaluate(kb).convert_to<double>() * mpow(ba, j);
      for (const auto& [j, c] : word.terms(Basis::aba))
        rebuilt += c.evaluate(kb).convert_to<double>() * mpow(ab, j) * a;
      for (const auto& [j, c] : word.terms(Basis::bab))
        rebuilt += c.evaluate(kb).convert_to<double>() * mpow(ba, j) * b;
      const Eigen::MatrixXd direct = mpow((I + a) * (I + b), n);
      CHECK((rebuilt - direct).cwiseAbs().maxCoeff() <= 1e-9 * direct.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("formal trace") {
  const TraceForm unit = formal_trace(WordElement::one());
  CHECK(unit.constant == 1);
  const TraceForm a = formal_trace(WordElement::a());
  CHECK(a.constant.is_zero());
  for (const auto& c : a.tau) CHECK(c.is_zero());
  for (unsigned n = 1; n <= 8; ++n) {
    const TraceForm tr = formal_trace(jacobi_word(n));
    const auto row = knj_from_table(jacobi_power(n));
    CHECK(tr.constant == jacobi_power(n).m);
    for (unsigned j = 1; j <= n; ++j) CHECK(tr.coefficient(j) == row[j]);
  }
}

TEST_CASE("stationary moments from words") {
  const KPoly k = KPoly::k();
  CHECK(stationary_from_words(1) == 1);
  for (unsigned n = 1; n < 14; ++n) {
    const KPoly lhs = k * k * stationary_from_words(n) - stationary_from_words(n + 1);
    CHECK(lhs == (k - 1).pow(n + 1) * KPoly(oracle::catalan(n)));
    const auto t = jacobi_power(n + 1);
    if (n + 1 >= 2) {
      CHECK(t.c[1] - t.c[2] ==
            (k - 1).pow(n) * KPoly(oracle::binom(2 * (n + 1), n + 1) / (n + 2)));
    }
  }
  for (unsigned kv = 2; kv <= 7; ++kv) {
    const auto expected = oracle::stationary_catalan(kv, 10);
    for (unsigned n = 1; n <= 10; ++n) {
      CHECK(stationary_from_words(n).evaluate(Rational(kv)) / rpow(Rational(kv), 2 * n - 1) == expected[n]);
    }
  }
  CHECK_THROWS_AS(stationary_from_words(0), std::invalid_argument);
}

TEST_CASE("CSV dumps") {
  std::ostringstream tables;
  write_coeff_tables_csv(tables, jacobi_powers(2));
  CHECK(tables.str().rfind("n,term,j,coefficient\n", 0) == 0);
  CHECK(tables.str().find("2,c,1,-1+2*k") != std::string::npos);
  std::ostringstream tri;
  std::vector<std::vector<KPoly>> rows;
  for (const auto& t : jacobi_powers(3)) rows.push_back(knj_from_table(t));
  write_k_triangle_csv(tri, rows);
  CHECK(tri.str().find("n,") == 0);
}
