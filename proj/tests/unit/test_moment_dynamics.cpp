#include "fjp/moment_dynamics.hpp"

#include "fjp/combinatorics.hpp"
#include "fjp/word_algebra.hpp"

#include <catch_amalgamated.hpp>
#include <oracles.hpp>

#include <sstream>

using namespace fjp;

TEST_CASE("parameter validation") {
  JacobiParams p = JacobiParams::single_projection(3, 4);
  CHECK_NOTHROW(p.validate());
  CHECK(p.initial_state() == std::vector<double>(5, 1.0));
  p.theta = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = JacobiParams::single_projection(3, 4);
  p.init = {1.0, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.init = {0.5, 0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(JacobiParams::single_projection(1, 3), std::invalid_argument);
  const auto j = JacobiParams::complement_projection(4, 3).to_json();
  const auto back = JacobiParams::from_json(j);
  CHECK(back.theta == make_rational(3, 4));
  CHECK(back.k == 4U);
}

TEST_CASE("first moment closed form and initial data") {
  for (unsigned k : {2U, 3U, 5U}) {
    const auto m = integrate_moments(JacobiParams::single_projection(k, 6), 10.0, 0.25);
    CHECK(m.values.front() == std::vector<double>(7, 1.0));
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      CHECK(m.values[i][0] == 1.0);
      CHECK(std::abs(m.values[i][1] - (1.0 / k + (1.0 - 1.0 / k) * std::exp(-m.t[i]))) < 1e-10);
    }
    CHECK_FALSE(m.range_violation);
  }
}

TEST_CASE("moment ODE against an independent integrator") {
  for (const auto& [lambda, theta] : {std::pair{make_rational(1, 1), make_rational(1, 3)},
                                      std::pair{make_rational(1, 2), make_rational(2, 3)},
                                      std::pair{make_rational(3, 4), make_rational(2, 5)}}) {
    JacobiParams p;
    p.lambda = lambda;
    p.theta = theta;
    p.n_max = 8;
    const std::vector<double> grid{0.0, 0.5, 1.0, 3.0, 6.0};
    const auto m = integrate_moments(p, grid);
    const auto ref =
        oracle::dopri(oracle::jacobi_system(to_double(lambda), to_double(theta)), std::vector<double>(9, 1.0), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (unsigned n = 0; n <= 8; ++n) CHECK(std::abs(m.values[i][n] - ref[i][n]) < 1e-10);
  }
  JacobiParams custom = JacobiParams::single_projection(3, 3);
  custom.init = {1.0, 0.5, 0.3, 0.2};
  const auto m = integrate_moments(custom, std::vector<double>{0.0, 1.0});
  CHECK(m.values[0] == custom.init);
  const auto ref = oracle::dopri(oracle::jacobi_system(1.0, 1.0 / 3), custom.init, {0.0, 1.0});
  for (unsigned n = 0; n <= 3; ++n) CHECK(std::abs(m.values[1][n] - ref[1][n]) < 1e-10);
}

TEST_CASE("W moments: s, r and m coincide") {
  for (unsigned k : {2U, 3U, 5U}) {
    const auto grid = uniform_grid(10.0, 0.5);
    const WMoments w = integrate_w_moments(k, 10, grid);
    const auto m = integrate_moments(JacobiParams::single_projection(k, 10), grid);
    CHECK(w.r_equation_residual < 1e-9);
    double gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(w.s.values[i][0] == 1.0);
      CHECK(std::abs(w.s.values[i][1] - (k + k * (k - 1.0) * std::exp(-grid[i]))) <
            1e-10 * (1 + w.s.values[i][1]));
      for (unsigned n = 0; n <= 10; ++n) gap = std::max(gap, std::abs(w.r.values[i][n] - m.values[i][n]));
    }
    CHECK(gap < 1e-9);
    CHECK(w.r.tag == MomentTag::w_normalized);
    CHECK(w.s.tag == MomentTag::w);
  }
  const auto r = integrate_r_moments(3, 4, std::vector<double>{0.0, 2.0});
  const auto m = integrate_moments(JacobiParams::single_projection(3, 4), std::vector<double>{0.0, 2.0});
  for (unsigned n = 0; n <= 4; ++n) CHECK(std::abs(r.values[1][n] - m.values[1][n]) < 1e-10);
}

TEST_CASE("long-time limit is the stationary law") {
  for (unsigned k : {2U, 3U, 6U}) {
    const auto m = integrate_moments(JacobiParams::single_projection(k, 8), std::vector<double>{0.0, 40.0});
    const auto stat = oracle::stationary_catalan(k, 8);
    for (unsigned n = 0; n <= 8; ++n) CHECK(std::abs(m.values[1][n] - stat[n].convert_to<double>()) < 1e-8);
  }
}

TEST_CASE("stationary moments, two routes") {
  for (unsigned k = 2; k <= 7; ++k) {
    const auto cat = stationary_moments_catalan(k, 12);
    const auto app = stationary_moments_appendix(k, 12);
    const auto ref = oracle::stationary_catalan(k, 12);
    for (unsigned n = 0; n <= 12; ++n) {
      CHECK(cat[n] == ref[n]);
      CHECK(app[n] == ref[n]);
    }
    CHECK(cat[1] == make_rational(1, k));
    for (unsigned n = 0; n <= 6; ++n) {
      CHECK(std::abs(to_double(cat[n]) - oracle::stationary_moment_quadrature(k, n)) < 1e-7);
    }
  }
  const auto k2 = stationary_moments_appendix(2, 10);
  for (unsigned n = 0; n <= 10; ++n) CHECK(k2[n] == Rational(oracle::binom(2 * n, n)) / rpow(Rational(4), n));
  CHECK(k2[2] == make_rational(3, 8));
}

TEST_CASE("P-script polynomials") {
  CHECK(p_script(0).coeffs == std::vector<BigInt>{1});
  CHECK(p_script(1).coeffs == std::vector<BigInt>{2, 1});
  CHECK(p_script(3).coeffs == std::vector<BigInt>{48, 87, 60, 15});
  for (unsigned n = 0; n <= 12; ++n) CHECK(p_script(n).coeffs.size() == n + 1);
  CHECK(p_script(1).evaluate(make_rational(1, 3)) == make_rational(7, 3));
  CHECK_THROWS_AS(p_script(41), std::length_error);
}

TEST_CASE("traces of T_k powers") {
  for (unsigned k = 2; k <= 7; ++k) {
    CHECK(tk_trace(k, 0) == 1);
    CHECK(tk_trace(k, 1) == 0);
    CHECK(tk_trace(k, 2) == k - 1);
    Rational h0 = 1;
    Rational h1 = 0;
    for (unsigned n = 2; n <= 20; ++n) {
      const Rational h2 = Rational(k - 2) * h1 + Rational(k - 1) * h0;
      CHECK(tk_trace(k, n) == h2);
      h0 = h1;
      h1 = h2;
    }
  }
}

TEST_CASE("complement moments") {
  const auto grid = uniform_grid(10.0, 0.5);
  for (unsigned k : {3U, 4U}) {
    const auto m = integrate_moments(JacobiParams::single_projection(k, 6), grid);
    const auto c = complement_moments(m);
    const auto direct = integrate_moments(JacobiParams::complement_projection(k, 6), grid);
    CHECK(c.tag == MomentTag::complement);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(c.values[i][0] == 1.0);
      for (unsigned n = 0; n <= 6; ++n) CHECK(std::abs(c.values[i][n] - direct.values[i][n]) < 1e-8);
    }
  }
  const auto m2 = integrate_moments(JacobiParams::single_projection(2, 4), grid);
  const auto c2 = complement_moments(m2);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (unsigned n = 0; n <= 4; ++n) CHECK(std::abs(c2.values[i][n] - m2.values[i][n]) < 1e-15);
  JacobiParams wrong = JacobiParams::complement_projection(3, 3);
  CHECK_THROWS_AS(complement_moments(integrate_moments(wrong, 1.0, 0.5)), std::invalid_argument);
}

TEST_CASE("large-k limit") {
  const std::vector<unsigned> ks{100, 1000, 10000};
  for (double t : {0.5, 1.0}) {
    for (unsigned n = 1; n <= 4; ++n) {
      const auto report = large_k_limit_check(t, n, ks);
      CHECK(report.decreasing);
      CHECK(report.stable);
      for (const auto& row : report.rows) CHECK(row.gap <= report.fitted_c / row.k * (1 + 1e-12));
    }
    const auto one = large_k_limit_check(t, 1, ks);
    for (const auto& row : one.rows) CHECK(std::abs(row.gap - (1.0 - std::exp(-t)) / row.k) < 1e-12);
  }
  CHECK(large_k_limit_check(1.0, 0, ks).rows[0].gap == 0.0);
  CHECK(large_k_limit_check(0.0, 3, ks).rows[0].gap == 0.0);
}

TEST_CASE("Marchenko-Pastur limit") {
  const auto rows = mp_limit_check(12, 1000);
  for (const auto& row : rows) {
    CHECK(row.pochhammer_form == Rational(oracle::catalan(row.n)));
    CHECK(row.gap < 0.1 * (row.n + 1) * static_cast<double>(row.catalan.convert_to<double>()));
  }
  CHECK(rows[2].pochhammer_form == 2);
  CHECK(rows[3].pochhammer_form == 5);
}

TEST_CASE("stationary density and distribution function") {
  for (unsigned k : {2U, 3U, 5U}) {
    const double edge = stationary_support_edge(k);
    CHECK(stationary_cdf(k, 0.0) == 0.0);
    CHECK(stationary_cdf(k, edge) == 1.0);
    CHECK(stationary_density(k, -0.1) == 0.0);
    CHECK(std::abs(oracle::stationary_moment_quadrature(k, 0) - 1.0) < 1e-9);
    for (double u : {0.1, 0.3, 0.5, 0.8}) {
      const double x = u * edge;
      const double h = 1e-6;
      const double derivative = (stationary_cdf(k, x + h) - stationary_cdf(k, x - h)) / (2 * h);
      CHECK(std::abs(derivative - stationary_density(k, x)) < 1e-5 * stationary_density(k, x));
    }
  }
}

TEST_CASE("moment vector serialization") {
  const auto m = integrate_moments(JacobiParams::single_projection(3, 2), 1.0, 0.5);
  std::ostringstream os;
  m.write_csv(os);
  CHECK(os.str().rfind("t,m_0,m_1,m_2\n", 0) == 0);
  const auto back = MomentVector::from_json(m.to_json());
  CHECK(back.values == m.values);
  CHECK(back.t == m.t);
  CHECK(back.params.theta == m.params.theta);
  CHECK(m.column(1).size() == m.t.size());
}
