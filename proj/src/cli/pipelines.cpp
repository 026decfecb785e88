#include "fjp/cli/pipelines.hpp"

#include "fjp/cli/plot_data.hpp"
#include "fjp/combinatorics.hpp"
#include "fjp/generating_functions.hpp"
#include "fjp/io.hpp"
#include "fjp/matrix_sim.hpp"
#include "fjp/moment_dynamics.hpp"
#include "fjp/word_algebra.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <gmp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace fjp::cli {

nlohmann::json to_json(const Check& check) {
  nlohmann::json j = {{"name", check.name}, {"value", check.value}, {"threshold", check.threshold},
                      {"pass", check.pass}};
  if (!check.note.empty()) j["note"] = check.note;
  return j;
}

namespace {

class Context {
 public:
  Context(const ExperimentSpec& spec, RunOutcome& outcome, std::ostream& log)
      : spec_(spec), outcome_(outcome), log_(log) {}

  const ExperimentSpec& spec() const { return spec_; }
  std::ostream& log() { return log_; }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file_atomic(spec_.output_dir / name, body);
    outcome_.artifacts.push_back(name);
  }

  /// Passes when value <= threshold.
  void check(std::string name, double value, double threshold, std::string note = {}) {
    const bool pass = std::isfinite(value) && value <= threshold;
    record({std::move(name), value, threshold, pass, std::move(note)});
  }
  /// Exact check: value is the number of mismatches.
  void exact(std::string name, std::size_t mismatches, std::string note = {}) {
    record({std::move(name), static_cast<double>(mismatches), 0.0, mismatches == 0, std::move(note)});
  }
  void error(std::string name, const std::string& message) {
    outcome_.errors.push_back(name + ": " + message);
    record({std::move(name), std::nan(""), 0.0, false, message});
  }

  double tolerance(double fallback) const { return spec_.tolerance.value_or(fallback); }

 private:
  void record(Check c) {
    log_ << (c.pass ? "ok   " : "FAIL ") << c.name << "  value=" << c.value << "  threshold=" << c.threshold;
    if (!c.note.empty()) log_ << "  (" << c.note << ")";
    log_ << '\n';
    outcome_.checks.push_back(std::move(c));
  }

  const ExperimentSpec& spec_;
  RunOutcome& outcome_;
  std::ostream& log_;
};

unsigned require_k(const Params& p) {
  const unsigned k = p.get_uint("k");
  if (k < 2) throw ConfigError("k must be at least 2");
  return k;
}

std::vector<double> grid_with_zero(std::vector<double> times) {
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

double max_gap(const MomentVector& a, const MomentVector& b, std::size_t n_max) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    for (std::size_t n = 0; n <= n_max; ++n) gap = std::max(gap, std::abs(a.values[i][n] - b.values[i][n]));
  }
  return gap;
}

std::size_t count_mismatches(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  std::size_t bad = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) bad += a[i] != b[i];
  return bad;
}

// ---------------------------------------------------------------------------

nlohmann::json run_moments(Context& ctx, const Params& p) {
  const unsigned k = require_k(p);
  const unsigned n_max = p.get_uint("n-max");
  const double t_end = p.get_real("t-end");
  const double dt = p.get_real("dt");
  const std::string family = p.get_string("family");
  if (!(t_end > 0) || !(dt > 0)) throw ConfigError("t-end and dt must be positive");
  const auto grid = uniform_grid(t_end, dt);

  if (family == "m") {
    JacobiParams params;
    params.k = k;
    params.lambda = p.get_rational("lambda");
    params.theta = p.has("theta") ? p.get_rational("theta") : make_rational(1, k);
    params.n_max = n_max;
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const MomentVector m = integrate_moments(params, grid);
    ctx.write("moments.csv", [&](std::ostream& os) { m.write_csv(os); });
    ctx.write("moments.json", [&](std::ostream& os) { os << m.to_json().dump(1) << '\n'; });
    ctx.write("moment_vs_t.csv", [&](std::ostream& os) { write_moment_vs_t_csv(os, m, nullptr); });
    ctx.exact("moments_in_unit_interval", m.range_violation ? 1 : 0);
    if (params.lambda == 1 && params.theta == make_rational(1, k)) {
      double gap = 0.0;
      for (std::size_t i = 0; i < m.t.size(); ++i) {
        const double exact = 1.0 / k + (1.0 - 1.0 / k) * std::exp(-m.t[i]);
        gap = std::max(gap, std::abs(m.values[i][1] - exact));
      }
      ctx.check("first_moment_closed_form", gap, 1e-10);
    }
    return {{"family", "m"}, {"final", m.values.back()}};
  }
  if (family == "w") {
    const WMoments w = integrate_w_moments(k, n_max, grid);
    ctx.write("s_moments.csv", [&](std::ostream& os) { w.s.write_csv(os); });
    ctx.write("r_moments.csv", [&](std::ostream& os) { w.r.write_csv(os); });
    ctx.write("moment_vs_t.csv", [&](std::ostream& os) { write_moment_vs_t_csv(os, w.r, nullptr); });
    ctx.check("r_equation_residual", w.r_equation_residual, 1e-9);
    const MomentVector m = integrate_moments(JacobiParams::single_projection(k, n_max), grid);
    ctx.check("r_equals_m", max_gap(w.r, m, n_max), ctx.tolerance(1e-9));
    return {{"family", "w"}, {"final_r", w.r.values.back()}, {"final_s", w.s.values.back()}};
  }
  if (family == "complement") {
    const MomentVector m = integrate_moments(JacobiParams::single_projection(k, n_max), grid);
    const MomentVector transformed = complement_moments(m);
    const MomentVector direct = integrate_moments(JacobiParams::complement_projection(k, n_max), grid);
    ctx.write("moments.csv", [&](std::ostream& os) { direct.write_csv(os); });
    ctx.write("moments_transformed.csv", [&](std::ostream& os) { transformed.write_csv(os); });
    ctx.check("complement_duality", max_gap(direct, transformed, n_max), ctx.tolerance(1e-8));
    ctx.exact("moments_in_unit_interval", direct.range_violation ? 1 : 0);
    return {{"family", "complement"}, {"final", direct.values.back()}};
  }
  throw ConfigError("family must be m, w or complement");
}

nlohmann::json run_stationary(Context& ctx, const Params& p) {
  const unsigned k = require_k(p);
  const unsigned n_max = p.get_uint("n-max");
  if (n_max < 1 || n_max > kMaxPScriptOrder) throw ConfigError("n-max must lie in [1, 40]");
  const auto catalan_route = stationary_moments_catalan(k, n_max);
  const auto appendix_route = stationary_moments_appendix(k, n_max);
  std::vector<Rational> word_route{Rational(1)};
  for (const auto& table : jacobi_powers(n_max)) {
    word_route.push_back(table.m.evaluate(Rational(k)) / rpow(Rational(k), 2 * table.n - 1));
  }
  ctx.exact("catalan_vs_legendre", count_mismatches(catalan_route, appendix_route));
  ctx.exact("catalan_vs_words", count_mismatches(catalan_route, word_route));
  std::size_t bad_diff = 0;
  for (unsigned n = 0; n < n_max; ++n) {
    const Rational expected = rpow(Rational(k - 1), n + 1) * Rational(catalan(n)) / rpow(Rational(k), 2 * n + 1);
    bad_diff += catalan_route[n] - catalan_route[n + 1] != expected;
  }
  ctx.exact("catalan_difference_law", bad_diff);
  ctx.write("stationary.csv", [&](std::ostream& os) {
    os << "n,catalan_route,legendre_route,word_route,value\n";
    for (unsigned n = 0; n <= n_max; ++n) {
      os << n << ',' << fjp::to_string(catalan_route[n]) << ',' << fjp::to_string(appendix_route[n]) << ','
         << fjp::to_string(word_route[n]) << ',' << format_double(to_double(catalan_route[n])) << '\n';
    }
  });
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : catalan_route) values.push_back(fjp::to_string(v));
  return {{"k", k}, {"moments", values}};
}

nlohmann::json run_expansion(Context& ctx, const Params& p) {
  const unsigned n_max = p.get_uint("n-max");
  if (n_max < 1 || n_max > kMaxJacobiPower) throw ConfigError("n-max must lie in [1, 64]");
  const auto tables = jacobi_powers(n_max);
  std::vector<std::vector<KPoly>> rows;
  std::size_t mismatches = 0;
  std::size_t symmetry = 0;
  for (const auto& table : tables) {
    rows.push_back(knj_from_table(table));
    for (unsigned j = 0; j <= table.n; ++j) mismatches += rows.back()[j] != knj_closed_form(table.n, j);
    symmetry += !table.symmetry_relations_hold();
  }
  ctx.exact("knj_closed_form", mismatches);
  ctx.exact("symmetry_relations", symmetry);
  ctx.write("k_triangle.csv", [&](std::ostream& os) { write_k_triangle_csv(os, rows); });
  ctx.write("coeff_tables.csv", [&](std::ostream& os) { write_coeff_tables_csv(os, tables); });
  return {{"n_max", n_max}};
}

nlohmann::json run_cumulants(Context& ctx, const Params& p) {
  const Rational alpha = p.get_rational("alpha");
  const unsigned n_max = p.get_uint("n-max");
  if (alpha <= 0 || alpha > 1) throw ConfigError("alpha must lie in (0, 1]");
  if (n_max < 1 || n_max > kMaxNcOrder) throw ConfigError("n-max must lie in [1, 16]");
  const CumulantTable legendre_table = projection_cumulants(alpha, n_max);
  std::vector<Rational> moments(n_max + 1, alpha);
  moments[0] = 1;
  const CumulantTable moebius = cumulants_from_moments(moments);
  std::size_t bad = 0;
  for (unsigned n = 1; n <= n_max; ++n) bad += legendre_table.at(n) != moebius.at(n);
  ctx.exact("legendre_vs_moebius", bad);
  ctx.exact("moment_round_trip", count_mismatches(moments_from_cumulants(legendre_table, n_max), moments));
  ctx.write("cumulants.csv", [&](std::ostream& os) {
    os << "n,legendre,moebius,value\n";
    for (unsigned n = 1; n <= n_max; ++n) {
      os << n << ',' << fjp::to_string(legendre_table.at(n)) << ',' << fjp::to_string(moebius.at(n)) << ','
         << format_double(to_double(legendre_table.at(n))) << '\n';
    }
  });
  ctx.write("cumulants.json", [&](std::ostream& os) { os << legendre_table.to_json().dump(1) << '\n'; });
  return legendre_table.to_json();
}

/// Moments on {0, t-2h, ..., t+2h} and the rho snapshots at the five stencil points.
struct Stencil {
  MomentVector m;
  std::vector<RealSeries> rho;
  std::vector<RealSeries> mgf;
};

Stencil stencil_at(unsigned k, unsigned order, double t, double h) {
  if (!(t > 2 * h)) throw ConfigError("residual times must exceed twice fd-step");
  std::vector<double> grid{0.0};
  for (int i = -2; i <= 2; ++i) grid.push_back(t + i * h);
  Stencil s;
  s.m = integrate_moments(JacobiParams::single_projection(k, order), grid);
  const RhoSnapshots rho = extract_rho_moments(s.m, k);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    s.rho.push_back(rho.snapshots[i].rho);
    s.mgf.push_back(RealSeries(order, s.m.values[i]));
  }
  return s;
}

nlohmann::json run_mgf_check(Context& ctx, const Params& p) {
  const unsigned k = require_k(p);
  const unsigned order = p.get_uint("order");
  const double h = p.get_real("fd-step");
  const auto times = p.get_real_list("times");
  const auto z = p.get_complex_list("z");
  const unsigned mgf_order = p.get_uint("mgf-order");
  if (order < 4 || order > 40 || mgf_order < 4 || mgf_order > 40) {
    throw ConfigError("order and mgf-order must lie in [4, 40]");
  }
  if (!(h > 0)) throw ConfigError("fd-step must be positive");
  if (times.empty()) throw ConfigError("times must not be empty");
  const double tol = ctx.tolerance(1e-5);

  std::vector<ResidualRow> rows;
  RhoSnapshots snapshots;
  snapshots.k = k;
  snapshots.snapshots.push_back({0.0, to_real(rho0_closed_form(k, order))});
  for (double t : times) {
    const Stencil s = stencil_at(k, order, t, h);
    snapshots.snapshots.push_back({t, s.rho[2]});
    const auto r0 = pde0_residual(s.rho, h, k);
    const auto r1 = pde1_residual(s.mgf, h, k);
    for (unsigned j = 0; j < r0.size(); ++j) rows.push_back({"pde0", k, t, j, r0[j]});
    for (unsigned j = 0; j < r1.size(); ++j) rows.push_back({"pde1", k, t, j, r1[j]});
    ctx.check("pde0_residual t=" + format_double(t), max_of(r0), tol);
    ctx.check("pde1_residual t=" + format_double(t), max_of(r1), tol);
    if (k == 2) {
      std::vector<RealSeries> eta;
      for (int i = -2; i <= 2; ++i) eta.push_back(eta_t2(t + i * h, order));
      const auto r2 = pde2_k2_residual(eta, h);
      for (unsigned j = 0; j < r2.size(); ++j) rows.push_back({"pde2", k, t, j, r2[j]});
      ctx.check("pde2_residual t=" + format_double(t), max_of(r2), tol);
      const auto w = RhoSnapshot{t, s.rho[2]}.w(2);
      double gap = 0.0;
      for (unsigned j = 1; j < w.size(); ++j) {
        const double expected = std::exp(-double(j) * t) * laguerre(j - 1, 1.0, 2.0 * j * t) / j;
        gap = std::max(gap, std::abs(w[j] - expected));
      }
      ctx.check("k2_laguerre_coefficients t=" + format_double(t), gap, 1e-7);
    }
  }
  double mgf_gap = 0.0;
  if (!z.empty()) {
    const MomentVector m = integrate_moments(JacobiParams::single_projection(k, mgf_order), grid_with_zero(times));
    try {
      mgf_gap = mgf_relation_check(m, k, z);
      ctx.check("mgf_relation", mgf_gap, 1e-8);
    } catch (const std::domain_error& e) {
      ctx.error("mgf_relation", e.what());
    }
  }
  ctx.write("residual.csv", [&](std::ostream& os) { write_residual_csv(os, rows); });
  ctx.write("rho_snapshots.json", [&](std::ostream& os) { os << snapshots.to_json().dump(1) << '\n'; });
  return {{"k", k}, {"order", order}, {"mgf_gap", mgf_gap}};
}

nlohmann::json run_characteristics(Context& ctx, const Params& p) {
  const unsigned k = require_k(p);
  const auto starts = p.get_complex_list("z0");
  const double t_end = p.get_real("t-end");
  CharacteristicOptions options;
  options.order = p.get_uint("order");
  options.output_step = p.get_real("output-step");
  if (starts.empty()) throw ConfigError("z0 must not be empty");
  if (!(t_end > 0) || !(options.output_step > 0)) throw ConfigError("t-end and output-step must be positive");
  const double tol = ctx.tolerance(1e-6);
  nlohmann::json paths = nlohmann::json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Complex z0 = starts[i];
    const std::string label = "z0=" + format_double(z0.real()) + (z0.imag() < 0 ? "" : "+") +
                              format_double(z0.imag()) + "i";
    try {
      const CharacteristicState state = characteristic_trace(k, z0, t_end, options);
      const std::string file = "characteristic_" + std::to_string(i) + ".csv";
      ctx.write(file, [&](std::ostream& os) { state.write_csv(os); });
      ctx.check("conserved_quantity_drift " + label, state.max_drift, tol);
      if (state.branch_crossed) ctx.error("branch " + label, "sqrt argument crossed the negative real axis");
      double curve_gap = 0.0;
      if (k == 2) {
        for (std::size_t j = 0; j < state.t.size(); ++j) {
          const Complex expected = z0 * std::exp(state.t[j] * (1.0 + z0) / (1.0 - z0));
          curve_gap = std::max(curve_gap, std::abs(state.z_path[j] - expected));
        }
        ctx.check("k2_explicit_curve " + label, curve_gap, 1e-8);
      }
      paths.push_back({{"z0", {z0.real(), z0.imag()}},
                       {"file", file},
                       {"max_drift", state.max_drift},
                       {"closed_form_gap", state.closed_form_gap},
                       {"branch_crossed", state.branch_crossed}});
    } catch (const SeriesDivergence& e) {
      ctx.error("characteristic " + label, e.what());
    }
  }
  return {{"k", k}, {"paths", paths}};
}

Observables parse_observables(const std::string& text) {
  Observables o{false, false, false, false};
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item == "density_matrix") o.density_matrix = true;
    else if (item == "w_moments") o.w_moments = true;
    else if (item == "compressed_jacobi") o.compressed_jacobi = true;
    else if (item == "complement") o.complement = true;
    else if (!item.empty()) throw ConfigError("unknown observable: " + item);
  }
  if (o.complement && !o.compressed_jacobi) throw ConfigError("complement requires compressed_jacobi");
  return o;
}

void check_simulation_invariants(Context& ctx, const SimulationResult& r, const std::string& prefix) {
  ctx.check(prefix + "unitarity_defect", r.max_unitarity_defect, 1e-8);
  for (const auto& o : r.observations) {
    const std::string at = " t=" + format_double(o.t);
    if (r.config.observables.density_matrix) {
      ctx.check(prefix + "density_trace_error" + at, o.density_trace_error, 1e-10);
      ctx.check(prefix + "density_negativity" + at, -o.density_min_eigenvalue, 1e-10);
    }
    if (r.config.observables.w_moments) {
      ctx.check(prefix + "normalized_max_eigenvalue" + at, o.normalized_max_eigenvalue, 1.0 + 1e-6);
    }
  }
}

double z_score(const MeanSe& v, double target) {
  if (v.se == 0.0) return v.mean == target ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(v.mean - target) / v.se;
}

SimConfig base_sim_config(const ExperimentSpec& spec) {
  SimConfig c;
  c.seed = spec.seed;
  c.threads = spec.threads;
  return c;
}

nlohmann::json run_simulate(Context& ctx, const Params& p) {
  SimConfig cfg = base_sim_config(ctx.spec());
  cfg.N = p.get_uint("N");
  cfg.k = require_k(p);
  cfg.t_end = p.get_real("t-end");
  cfg.dt = p.get_real("dt");
  cfg.trajectories = p.get_uint("trajectories");
  cfg.n_moments = p.get_uint("n-moments");
  cfg.observation_times = p.get_real_list("times");
  cfg.observables = parse_observables(p.get_string("observables"));
  cfg.reproject_every = p.get_uint("reproject-every");
  cfg.keep_samples = p.get_bool("keep-samples");
  try {
    cfg.method = step_method_from_string(p.get_string("method"));
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const unsigned bins = p.get_uint("bins");
  const auto times = cfg.resolved_times();
  const auto grid = grid_with_zero(times);
  nlohmann::json summary = nlohmann::json::object();

  // Agreement with the ODE is reported as z-scores; only hard invariants fail the run.
  auto zscores = [&](const std::vector<ObservationStats>& obs, const MomentVector& ode, bool compressed) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& o : obs) {
      const auto it = std::find_if(ode.t.begin(), ode.t.end(), [&](double t) { return std::abs(t - o.t) < 1e-9; });
      const auto& row = ode.values[static_cast<std::size_t>(it - ode.t.begin())];
      const auto& stats = compressed ? o.compressed : o.r;
      nlohmann::json z = nlohmann::json::array();
      for (std::size_t n = 1; n < stats.size(); ++n) z.push_back(z_score(stats[n], row[n]));
      out.push_back({{"t", o.t}, {"moment_z_scores", z}, {"trace_u_z_score", z_score(o.trace_u, std::exp(-o.t / 2))}});
    }
    return out;
  };

  if (cfg.observables.density_matrix || cfg.observables.w_moments) {
    SimConfig plain = cfg;
    plain.observables.compressed_jacobi = false;
    plain.observables.complement = false;
    const SimulationResult result = simulate(plain);
    check_simulation_invariants(ctx, result, "");
    const MomentVector ode = integrate_moments(JacobiParams::single_projection(cfg.k, cfg.n_moments), grid);
    ctx.write("summary.json", [&](std::ostream& os) {
      auto j = result.summary_json();
      j.erase("wall_seconds");
      os << j.dump(1) << '\n';
    });
    if (cfg.observables.w_moments) {
      ctx.write("moment_vs_t.csv", [&](std::ostream& os) { write_moment_vs_t_csv(os, ode, &result); });
      summary["agreement"] = zscores(result.observations, ode, false);
    }
    if (cfg.keep_samples) {
      ctx.write("samples.csv", [&](std::ostream& os) { result.write_samples_csv(os); });
      std::vector<double> pooled;
      for (const auto& s : result.samples) {
        if (s.observable == "w_normalized" && std::abs(s.t - times.back()) < 1e-9) {
          pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
        }
      }
      if (!pooled.empty()) {
        ctx.write("histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, pooled, cfg.k, bins); });
      }
    }
    summary["wall_seconds"] = result.wall_seconds;
    summary["threads_used"] = result.threads_used;
  }
  if (cfg.observables.compressed_jacobi) {
    ProjectionRanks ranks;
    ranks.p = p.has("p") ? p.get_rational("p") : make_rational(1, cfg.k);
    ranks.q = p.has("q") ? p.get_rational("q") : ranks.p;
    if (ranks.q < ranks.p) throw ConfigError("q must be at least p");
    SimConfig compressed = cfg;
    compressed.observables.density_matrix = false;
    compressed.observables.w_moments = false;
    SimulationResult result;
    try {
      result = simulate_compressed_jacobi(compressed, ranks);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    check_simulation_invariants(ctx, result, "compressed_");
    JacobiParams params;
    params.theta = ranks.q;
    params.lambda = ranks.p / ranks.q;
    params.n_max = cfg.n_moments;
    const MomentVector ode = integrate_moments(params, grid);
    ctx.write("summary_compressed.json", [&](std::ostream& os) {
      auto j = result.summary_json();
      j.erase("wall_seconds");
      os << j.dump(1) << '\n';
    });
    ctx.write("moment_vs_t_compressed.csv", [&](std::ostream& os) { write_moment_vs_t_csv(os, ode, &result); });
    if (cfg.keep_samples) {
      ctx.write("samples_compressed.csv", [&](std::ostream& os) { result.write_samples_csv(os); });
    }
    summary["compressed_agreement"] = zscores(result.observations, ode, true);
    summary["compressed_wall_seconds"] = result.wall_seconds;
  }
  return summary;
}

nlohmann::json run_full_verify(Context& ctx, const Params& p) {
  const unsigned k = require_k(p);
  const unsigned n_max = p.get_uint("n-max");
  const double t_end = p.get_real("t-end");
  if (n_max < 2 || n_max > 12) throw ConfigError("n-max must lie in [2, 12]");
  if (!(t_end > 0)) throw ConfigError("t-end must be positive");

  // Exact identities.
  {
    std::size_t bad = 0;
    for (const auto& table : jacobi_powers(n_max)) {
      const auto row = knj_from_table(table);
      for (unsigned j = 0; j <= table.n; ++j) bad += row[j] != knj_closed_form(table.n, j);
    }
    ctx.exact("knj_closed_form", bad);
    const auto cat = stationary_moments_catalan(k, n_max);
    ctx.exact("stationary_two_routes", count_mismatches(cat, stationary_moments_appendix(k, n_max)));
    std::size_t bad_diff = 0;
    for (unsigned n = 0; n < n_max; ++n) {
      bad_diff += cat[n] - cat[n + 1] !=
                  rpow(Rational(k - 1), n + 1) * Rational(catalan(n)) / rpow(Rational(k), 2 * n + 1);
    }
    ctx.exact("catalan_difference_law", bad_diff);
    std::size_t bad_rho0 = 0;
    const auto rho0 = rho0_closed_form(k, n_max);
    for (unsigned n = 1; n <= n_max; ++n) bad_rho0 += rho0[n] != tk_trace(k, 2 * n) / rpow(Rational(k - 1), n);
    ctx.exact("rho0_binet", bad_rho0);
    std::size_t bad_mp = 0;
    try {
      mp_limit_check(n_max, 1000);
    } catch (const std::logic_error&) {
      bad_mp = 1;
    }
    ctx.exact("marchenko_pastur_pochhammer", bad_mp);
    const Rational alpha = make_rational(1, k);
    std::vector<Rational> moments(n_max + 1, alpha);
    moments[0] = 1;
    const auto moebius = cumulants_from_moments(moments);
    const auto legendre_table = projection_cumulants(alpha, n_max);
    std::size_t bad_cum = 0;
    for (unsigned n = 1; n <= n_max; ++n) bad_cum += moebius.at(n) != legendre_table.at(n);
    ctx.exact("projection_cumulants", bad_cum);
  }

  // ODE routes.
  const auto grid = uniform_grid(t_end, 0.1);
  const MomentVector m = integrate_moments(JacobiParams::single_projection(k, n_max), grid);
  ctx.exact("moments_in_unit_interval", m.range_violation ? 1 : 0);
  const WMoments w = integrate_w_moments(k, n_max, grid);
  ctx.check("r_equals_m", max_gap(w.r, m, n_max), 1e-9);
  double first = 0.0;
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    first = std::max(first, std::abs(m.values[i][1] - (1.0 / k + (1.0 - 1.0 / k) * std::exp(-m.t[i]))));
  }
  ctx.check("first_moment_closed_form", first, 1e-10);
  const MomentVector direct = integrate_moments(JacobiParams::complement_projection(k, n_max), grid);
  ctx.check("complement_duality", max_gap(direct, complement_moments(m), n_max), 1e-8);
  ctx.write("moments.csv", [&](std::ostream& os) { m.write_csv(os); });

  // Inversion round trip and pde0.
  const RhoSnapshots rho = extract_rho_moments(m, k);
  double round_trip = 0.0;
  for (std::size_t i = 0; i < rho.snapshots.size(); ++i) {
    const auto back = moments_from_rho(rho.snapshots[i].rho, k);
    for (unsigned n = 0; n <= n_max; ++n) round_trip = std::max(round_trip, std::abs(back[n] - m.values[i][n]));
  }
  ctx.check("rho_round_trip", round_trip, 1e-12);
  std::vector<ResidualRow> rows;
  std::set<double> pde_times;
  for (double t : {0.5, 1.0, 2.0}) {
    if (t <= t_end) pde_times.insert(t);
  }
  pde_times.insert(t_end / 2);
  for (double t : pde_times) {
    const Stencil s = stencil_at(k, n_max, t, 1e-3);
    const auto r0 = pde0_residual(s.rho, 1e-3, k);
    for (unsigned j = 0; j < r0.size(); ++j) rows.push_back({"pde0", k, t, j, r0[j]});
    ctx.check("pde0_residual t=" + format_double(t), max_of(r0), ctx.tolerance(1e-5));
  }
  ctx.write("residual.csv", [&](std::ostream& os) { write_residual_csv(os, rows); });

  // Monte Carlo.
  SimConfig cfg = base_sim_config(ctx.spec());
  cfg.N = p.get_uint("mc-N");
  cfg.k = k;
  cfg.dt = p.get_real("mc-dt");
  cfg.t_end = std::round(t_end / cfg.dt) * cfg.dt;
  cfg.trajectories = p.get_uint("mc-trajectories");
  cfg.n_moments = 3;
  const double t_mid = std::round(1.0 / cfg.dt) * cfg.dt;
  cfg.observation_times = t_mid < cfg.t_end ? std::vector<double>{t_mid, cfg.t_end} : std::vector<double>{cfg.t_end};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const SimulationResult sim = simulate(cfg);
  check_simulation_invariants(ctx, sim, "mc_");
  const MomentVector ode = integrate_moments(JacobiParams::single_projection(k, 3),
                                             grid_with_zero(cfg.resolved_times()));
  for (const auto& o : sim.observations) {
    const auto it = std::find_if(ode.t.begin(), ode.t.end(), [&](double t) { return std::abs(t - o.t) < 1e-9; });
    const auto& row = ode.values[static_cast<std::size_t>(it - ode.t.begin())];
    const std::string at = " t=" + format_double(o.t);
    for (unsigned n = 1; n <= 3; ++n) {
      ctx.check("mc_r" + std::to_string(n) + "_z_score" + at, z_score(o.r[n], row[n]), 3.0);
    }
    ctx.check("mc_trace_u_z_score" + at, z_score(o.trace_u, std::exp(-o.t / 2)), 3.0);
    ctx.check("mc_gram_trace_z_score" + at, z_score(o.gram_trace, k * (1.0 + (k - 1.0) * std::exp(-o.t))), 3.0);
  }
  ctx.write("moment_vs_t.csv", [&](std::ostream& os) { write_moment_vs_t_csv(os, ode, &sim); });
  return {{"k", k}, {"n_max", n_max}, {"t_end", t_end}, {"mc", sim.summary_json()}};
}

nlohmann::json versions() {
  return {{"fjp", kVersion},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"gmp", gmp_version}};
}

}  // namespace

RunOutcome run_with_outcome(const ExperimentSpec& spec, std::ostream& log) {
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    spec.validate();
    const Params params(spec);
    Context ctx(spec, outcome, log);
    if (spec.command == "moments") outcome.summary = run_moments(ctx, params);
    else if (spec.command == "stationary") outcome.summary = run_stationary(ctx, params);
    else if (spec.command == "expansion-verify") outcome.summary = run_expansion(ctx, params);
    else if (spec.command == "cumulants") outcome.summary = run_cumulants(ctx, params);
    else if (spec.command == "mgf-check") outcome.summary = run_mgf_check(ctx, params);
    else if (spec.command == "characteristics") outcome.summary = run_characteristics(ctx, params);
    else if (spec.command == "simulate") outcome.summary = run_simulate(ctx, params);
    else if (spec.command == "full-verify") outcome.summary = run_full_verify(ctx, params);
    else throw ConfigError("unknown command: " + spec.command);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    outcome.exit_code = kExitConfigError;
    outcome.errors.push_back(e.what());
    return outcome;
  } catch (const std::exception& e) {
    log << "FAIL " << e.what() << '\n';
    outcome.errors.push_back(e.what());
  }
  bool pass = outcome.errors.empty();
  for (const auto& c : outcome.checks) pass = pass && c.pass;
  outcome.exit_code = pass ? kExitOk : kExitVerificationFailed;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : outcome.checks) checks.push_back(to_json(c));
  nlohmann::json manifest = {{"spec", spec.to_json()},
                             {"versions", versions()},
                             {"status", pass ? "pass" : "fail"},
                             {"exit_code", outcome.exit_code},
                             {"checks", checks},
                             {"errors", outcome.errors},
                             {"artifacts", outcome.artifacts},
                             {"summary", outcome.summary},
                             {"wall_seconds", wall}};
  try {
    write_file_atomic(spec.output_dir / "manifest.json", manifest.dump(1) + "\n");
  } catch (const std::exception& e) {
    log << "cannot write manifest: " << e.what() << '\n';
    outcome.exit_code = kExitVerificationFailed;
  }
  log << (pass ? "PASS " : "FAIL ") << spec.command << " (" << outcome.checks.size() << " checks, "
      << format_double(std::round(wall * 100) / 100) << " s)\n";
  return outcome;
}

int run(const ExperimentSpec& spec, std::ostream& log) { return run_with_outcome(spec, log).exit_code; }

}  // namespace fjp::cli
