#include "fjp/matrix_sim.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace fjp;

namespace {

double normalized_trace_power(const Eigen::VectorXd& eig, unsigned p) {
  double s = 0.0;
  for (double v : eig) s += std::pow(v, p);
  return s / static_cast<double>(eig.size());
}

}  // namespace

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 5, 2) == derive_seed(1, 5, 2));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(step_method_from_string("spectral") == StepMethod::spectral);
  CHECK(to_string(StepMethod::eigendecomposition) == "eigendecomposition");
  CHECK_THROWS_AS(step_method_from_string("qr"), std::invalid_argument);
}

TEST_CASE("GUE samplers agree in law") {
  const unsigned n = 8;
  const unsigned reps = 600;
  Rng a(11);
  Rng b(12);
  std::vector<double> m2a;
  std::vector<double> m4a;
  std::vector<double> m2b;
  std::vector<double> m4b;
  for (unsigned r = 0; r < reps; ++r) {
    const CMatrix g = sample_gue(n, a);
    CHECK((g - g.adjoint()).norm() < 1e-14);
    const auto ea = hermitian_eigenvalues(g);
    const auto eb = sample_gue_spectrum(n, b);
    m2a.push_back(normalized_trace_power(ea, 2));
    m4a.push_back(normalized_trace_power(ea, 4));
    m2b.push_back(normalized_trace_power(eb, 2));
    m4b.push_back(normalized_trace_power(eb, 4));
  }
  // E tr G^2 / N = 1, E tr G^4 / N = 2 + 1/N^2
  const double m4 = 2.0 + 1.0 / (n * n);
  CHECK(mean_and_se(m2a).within(1.0, 4.0));
  CHECK(mean_and_se(m2b).within(1.0, 4.0));
  CHECK(mean_and_se(m4a).within(m4, 4.0));
  CHECK(mean_and_se(m4b).within(m4, 4.0));
}

TEST_CASE("Haar unitaries") {
  Rng rng(3);
  const unsigned n = 4;
  std::vector<double> tr2;
  std::vector<double> re_tr;
  for (unsigned r = 0; r < 2000; ++r) {
    const CMatrix u = sample_haar_unitary(n, rng);
    CHECK(unitarity_defect(u) < 1e-12);
    const auto t = u.trace();
    tr2.push_back(std::norm(t));
    re_tr.push_back(t.real());
  }
  // E tr U = 0, E |tr U|^2 = 1
  CHECK(mean_and_se(re_tr).within(0.0, 4.0));
  CHECK(mean_and_se(tr2).within(1.0, 4.0));
}

TEST_CASE("unitary Brownian motion stays unitary") {
  Rng rng(5);
  for (auto method : {StepMethod::spectral, StepMethod::eigendecomposition}) {
    UnitaryBrownianMotion ubm(10, 1e-2, {method, 25});
    CHECK(ubm.state() == CMatrix::Identity(10, 10));
    ubm.advance(200, rng);
    CHECK(ubm.steps() == 200);
    CHECK(ubm.time() == Catch::Approx(2.0));
    CHECK(unitarity_defect(ubm.state()) < 1e-8);
    CHECK(ubm.max_defect() < 1e-8);
  }
  const auto path = evolve_ubm(5, 0.1, 10, rng, StepMethod::spectral, 4);
  REQUIRE(path.size() == 4);
  CHECK(path.front() == CMatrix::Identity(5, 5));
  CMatrix far = CMatrix::Identity(3, 3) * 2.0;
  CHECK_THROWS_AS(polar_reproject(far), UnitarityError);
  CMatrix near = CMatrix::Identity(3, 3) * (1.0 + 1e-4);
  polar_reproject(near);
  CHECK(unitarity_defect(near) < 1e-12);
}

TEST_CASE("density matrix and empirical moments") {
  const std::vector<CMatrix> ids(3, CMatrix::Identity(4, 4));
  const CMatrix rho = build_density_matrix(ids);
  CHECK((rho - CMatrix::Identity(4, 4) / 4.0).norm() < 1e-15);
  CHECK((gram_of_sum(ids) - 9.0 * CMatrix::Identity(4, 4)).norm() < 1e-14);
  const auto m = empirical_moments(CMatrix::Identity(4, 4), 5);
  for (double v : m) CHECK(v == Catch::Approx(1.0));
  const std::vector<double> eig{0.0, 1.0, 2.0, 3.0};
  const auto e = empirical_moments(eig, 2);
  CHECK(e[1] == Catch::Approx(1.5));
  CHECK(e[2] == Catch::Approx(3.5));
  CHECK_THROWS_AS(empirical_moments(eig, kMaxEmpiricalMoment + 1), std::invalid_argument);
  const std::vector<CMatrix> cancel{CMatrix::Identity(2, 2), -CMatrix::Identity(2, 2)};
  CHECK_THROWS_AS(build_density_matrix(cancel), std::domain_error);
}

TEST_CASE("configuration validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  c.k = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.observation_times = {0.5005};
  c.dt = 1e-2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.observation_times = {2.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.observation_times = {1.0, 0.5};
  CHECK_NOTHROW(c.validate());
  CHECK(c.resolved_times() == std::vector<double>{0.5, 1.0});
  CHECK(c.to_json()["observation_times"].size() == 2);
  c.n_moments = kMaxEmpiricalMoment + 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("observables at time zero") {
  SimConfig c;
  c.N = 6;
  c.k = 3;
  c.t_end = 0.02;
  c.dt = 0.01;
  c.trajectories = 3;
  c.threads = 1;
  c.observation_times = {0.0, 0.02};
  const auto res = simulate(c);
  REQUIRE(res.observations.size() == 2);
  const auto& o = res.observations.front();
  CHECK(o.steps == 0);
  CHECK(o.trace_u.mean == Catch::Approx(1.0));
  CHECK(o.gram_trace.mean == Catch::Approx(9.0));
  for (const auto& r : o.r) CHECK(r.mean == Catch::Approx(1.0));
  CHECK(o.density_trace_error < 1e-12);
  CHECK(o.density_min_eigenvalue == Catch::Approx(1.0 / 6));
  CHECK(res.max_unitarity_defect < 1e-8);

  SimConfig cc = c;
  cc.observables = {false, false, true, true};
  const auto comp = simulate_compressed_jacobi(cc, {make_rational(1, 2), make_rational(1, 2)});
  for (const auto& v : comp.observations.front().compressed) CHECK(v.mean == Catch::Approx(1.0));
  for (const auto& v : comp.observations.front().complement) CHECK(v.mean == Catch::Approx(1.0));
  CHECK_THROWS_AS(simulate_compressed_jacobi(cc, {make_rational(1, 4), make_rational(1, 2)}),
                  std::invalid_argument);
}

TEST_CASE("reproducible and independent of thread count") {
  SimConfig c;
  c.N = 8;
  c.k = 2;
  c.t_end = 0.2;
  c.dt = 0.01;
  c.trajectories = 6;
  c.seed = 99;
  c.keep_samples = true;
  c.threads = 1;
  const auto a = simulate(c);
  c.threads = 2;
  const auto b = simulate(c);
  REQUIRE(a.observations.size() == b.observations.size());
  const auto& oa = a.observations.back();
  const auto& ob = b.observations.back();
  CHECK(oa.trace_u.mean == ob.trace_u.mean);
  CHECK(oa.gram_trace.mean == ob.gram_trace.mean);
  for (std::size_t n = 0; n < oa.r.size(); ++n) CHECK(oa.r[n].mean == ob.r[n].mean);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].eigenvalues == b.samples[i].eigenvalues);
  std::ostringstream os;
  a.write_samples_csv(os);
  CHECK(os.str().rfind("observable,trajectory,seed,N,k,t,steps,index,eigenvalue\n", 0) == 0);
  CHECK(a.summary_json()["observations"].size() == 1);
  c.seed = 100;
  CHECK(simulate(c).observations.back().trace_u.mean != oa.trace_u.mean);
}

TEST_CASE("small-N trace decay") {
  // E tr(U_t)/N = exp(-t/2) at every N for this normalization
  SimConfig c;
  c.N = 6;
  c.k = 2;
  c.t_end = 1.0;
  c.dt = 0.01;
  c.trajectories = 300;
  c.observables = {false, false, false, false};
  const auto res = simulate(c);
  CHECK(res.observations.back().trace_u.within(std::exp(-0.5), 4.0));
}
