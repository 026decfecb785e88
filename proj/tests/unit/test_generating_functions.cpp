#include "fjp/generating_functions.hpp"

#include <catch_amalgamated.hpp>
#include <oracles.hpp>

#include <sstream>

using namespace fjp;

TEST_CASE("alpha map and its inverse") {
  for (Complex z : {Complex(0.3, 0), Complex(-0.5, 0.2), Complex(0.1, -0.7), Complex(-3, 0)}) {
    CHECK(std::abs(alpha_inv(alpha_map(z)) - z) < 1e-13);
  }
  CHECK(std::abs(alpha_map(0.0)) == 0.0);
  CHECK(std::abs(alpha_map(0.75) - 1.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(alpha_map(2.0), std::domain_error);
  CHECK_THROWS_AS(alpha_inv(-1.0), std::domain_error);
}

TEST_CASE("stationary generating function") {
  for (unsigned k : {2U, 3U, 5U}) {
    const auto s = stationary_mgf(k, 12);
    const auto ref = oracle::stationary_catalan(k, 12);
    for (unsigned n = 0; n <= 12; ++n) CHECK(s[n] == ref[n]);
    const auto big = to_real(stationary_mgf(k, 80));
    for (Complex z : {Complex(0.3, 0), Complex(-0.2, 0.4)})
      CHECK(std::abs(big.evaluate(z) - stationary_mgf_value(k, z)) < 1e-12);
  }
}

TEST_CASE("binomial transfer") {
  RationalSeries e1(8);
  e1[1] = 1;
  const auto b = binomial_transfer(e1);
  CHECK(b[0] == 0);
  for (unsigned n = 1; n <= 8; ++n) CHECK(b[n] == Rational(oracle::binom(2 * n, n - 1)));
  RationalSeries a(8, {make_rational(1, 2), 3, -1, make_rational(2, 7)});
  CHECK(inverse_binomial_transfer(binomial_transfer(a)) == a);
  RealSeries ar(6, {0.5, 1.5, -2.0});
  const auto back = inverse_binomial_transfer(binomial_transfer(ar));
  for (unsigned n = 0; n <= 6; ++n) CHECK(std::abs(back[n] - ar[n]) < 1e-12);
}

TEST_CASE("rho at time zero") {
  for (unsigned k : {2U, 3U, 4U, 7U}) {
    const auto closed = rho0_closed_form(k, 12);
    const auto taylor = oracle::rho0_taylor(k, 12);
    for (unsigned n = 0; n <= 12; ++n) CHECK(closed[n] == taylor[n]);
    const std::vector<double> ones(13, 1.0);
    const auto snap = extract_rho(ones, k);
    for (unsigned n = 0; n <= 12; ++n) CHECK(std::abs(snap.rho[n] - taylor[n].convert_to<double>()) <
                                           1e-10 * (1 + std::abs(taylor[n].convert_to<double>())));
    const auto w = snap.w(k);
    CHECK(std::abs(w[0]) < 1e-12);
    CHECK(std::abs(w[1] - (k - 1.0)) < 1e-9);
    const auto m = moments_from_rho(snap.rho, k);
    for (unsigned n = 0; n <= 12; ++n) CHECK(std::abs(m[n] - 1.0) < 1e-9);
  }
}

TEST_CASE("extraction along a solution") {
  const unsigned k = 3;
  const auto m = integrate_moments(JacobiParams::single_projection(k, 10), uniform_grid(2.0, 0.5));
  const auto rho = extract_rho_moments(m, k);
  REQUIRE(rho.snapshots.size() == m.t.size());
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    const auto back = moments_from_rho(rho.snapshots[i].rho, k);
    for (unsigned n = 0; n <= 10; ++n) CHECK(std::abs(back[n] - m.values[i][n]) < 1e-12);
  }
  CHECK(rho.to_json()["k"] == 3);
  CHECK_THROWS_AS(extract_rho_moments(m, 4), std::invalid_argument);
  const auto comp = integrate_moments(JacobiParams::complement_projection(3, 4), 1.0, 0.5);
  CHECK_THROWS_AS(extract_rho_moments(comp, 3), std::invalid_argument);
}

TEST_CASE("k = 2: Laguerre series") {
  for (unsigned n = 0; n <= 8; ++n)
    for (double x : {0.0, 0.4, 3.0})
      CHECK(std::abs(laguerre(n, 1.0, x) - oracle::laguerre_explicit(n, 1, x)) <
            1e-12 * (1 + std::abs(oracle::laguerre_explicit(n, 1, x))));
  const auto grid = uniform_grid(2.0, 0.25);
  const auto m = integrate_moments(JacobiParams::single_projection(2, 10), grid);
  const auto rho = extract_rho_moments(m, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const auto w = rho.snapshots[i].w(2);
    CHECK(std::abs(w[1] - std::exp(-t)) < 1e-9);
    const auto eta = eta_t2(t, 10);
    for (unsigned j = 1; j <= 10; ++j) {
      const double expected = oracle::laguerre_explicit(j - 1, 1, 2.0 * j * t) / j;
      CHECK(std::abs(eta[j] - expected) < 1e-12 * (1 + std::abs(expected)));
      CHECK(std::abs(w[j] - std::exp(-static_cast<double>(j) * t) * expected) < 1e-7);
    }
  }
}

TEST_CASE("transport equation residuals") {
  for (unsigned k : {2U, 3U, 5U}) {
    const double h = 1e-3;
    const double t = 1.0;
    const std::vector<double> grid{0.0, t - 2 * h, t - h, t, t + h, t + 2 * h};
    const auto m = integrate_moments(JacobiParams::single_projection(k, 8), grid);
    const auto rho = extract_rho_moments(m, k);
    std::vector<RealSeries> rs;
    std::vector<RealSeries> ms;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      rs.push_back(rho.snapshots[i].rho);
      ms.push_back(RealSeries(8, m.values[i]));
    }
    CHECK(max_of(pde0_residual(rs, h, k)) < 1e-7);
    CHECK(max_of(pde1_residual(ms, h, k)) < 1e-7);
    const std::vector<RealSeries> three{rs[1], rs[2], rs[3]};
    CHECK(max_of(pde0_residual(three, h, k)) < 1e-4);
  }
  std::vector<RealSeries> eta;
  for (int i = -2; i <= 2; ++i) eta.push_back(eta_t2(0.5 + i * 1e-3, 10));
  CHECK(max_of(pde2_k2_residual(eta, 1e-3)) < 1e-7);
  const std::vector<RealSeries> four(4, RealSeries(3));
  CHECK_THROWS_AS(central_time_derivative(four, 0.1), std::invalid_argument);
}

TEST_CASE("characteristic curves") {
  CharacteristicOptions opt;
  opt.output_step = 0.05;
  const auto k2 = characteristic_trace(2, Complex(0.05, 0.1), 0.5, opt);
  CHECK_FALSE(k2.branch_crossed);
  CHECK(k2.max_drift < 1e-7);
  CHECK(k2.closed_form_gap < 1e-7);
  CHECK(std::abs(k2.z_path.front() - Complex(0.05, 0.1)) < 1e-15);
  const auto k3 = characteristic_trace(3, Complex(0.05, 0.0), 0.5, opt);
  CHECK(k3.max_drift < 1e-7);
  CHECK(k3.t.size() == k3.drift.size());
  std::ostringstream os;
  k3.write_csv(os);
  CHECK(os.str().find("drift") != std::string::npos);
  CHECK(std::abs(h_involution(h_involution(Complex(0.3, 0.2))) - Complex(0.3, 0.2)) < 1e-14);
  CHECK(std::abs(lambda_tilde(2, Complex(5, 1)) - 1.0) < 1e-15);
}

TEST_CASE("MGF relation") {
  for (unsigned k : {2U, 3U, 4U}) {
    const auto m = integrate_moments(JacobiParams::single_projection(k, 16), std::vector<double>{0.0, 0.5, 1.0, 2.0});
    const std::vector<Complex> z{Complex(0.05, 0), Complex(0, 0.1), Complex(-0.1, 0)};
    CHECK(mgf_relation_check(m, k, z) < 1e-8);
  }
  const auto m = integrate_moments(JacobiParams::single_projection(3, 16), 1.0, 0.5);
  const std::vector<Complex> far{Complex(1.2, 0)};
  CHECK_THROWS_AS(mgf_relation_check(m, 3, far), std::domain_error);
}
