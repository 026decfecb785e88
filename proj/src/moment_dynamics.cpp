#include "fjp/moment_dynamics.hpp"

#include "fjp/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fjp {

JacobiParams JacobiParams::single_projection(unsigned k, unsigned n_max) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  JacobiParams p;
  p.k = k;
  p.lambda = 1;
  p.theta = make_rational(1, k);
  p.n_max = n_max;
  return p;
}

JacobiParams JacobiParams::complement_projection(unsigned k, unsigned n_max) {
  JacobiParams p = single_projection(k, n_max);
  p.theta = make_rational(k - 1, k);
  return p;
}

void JacobiParams::validate() const {
  if (k && *k < 2) throw std::invalid_argument("k must be at least 2");
  if (lambda <= 0 || lambda > 1) throw std::invalid_argument("lambda must lie in (0,1]");
  if (theta <= 0 || theta > 1) throw std::invalid_argument("theta must lie in (0,1]");
  if (lambda * theta > 1) throw std::invalid_argument("lambda * theta must not exceed 1");
  if (n_max == 0) throw std::invalid_argument("n_max must be at least 1");
  if (!init.empty()) {
    if (init.size() != n_max + 1) {
      throw std::invalid_argument("init must hold m_0..m_n_max");
    }
    if (init[0] != 1.0) throw std::invalid_argument("init[0] must be 1");
    for (double v : init) {
      if (!std::isfinite(v)) throw std::invalid_argument("init must be finite");
    }
  }
}

std::vector<double> JacobiParams::initial_state() const {
  if (!init.empty()) return init;
  return std::vector<double>(n_max + 1, 1.0);
}

nlohmann::json JacobiParams::to_json() const {
  nlohmann::json j;
  j["k"] = k ? nlohmann::json(*k) : nlohmann::json(nullptr);
  j["lambda"] = fjp::to_string(lambda);
  j["theta"] = fjp::to_string(theta);
  j["n_max"] = n_max;
  j["init"] = initial_state();
  return j;
}

JacobiParams JacobiParams::from_json(const nlohmann::json& j) {
  JacobiParams p;
  if (j.contains("k") && !j.at("k").is_null()) p.k = j.at("k").get<unsigned>();
  p.lambda = parse_rational(j.at("lambda").get<std::string>());
  p.theta = parse_rational(j.at("theta").get<std::string>());
  p.n_max = j.at("n_max").get<unsigned>();
  if (j.contains("init")) p.init = j.at("init").get<std::vector<double>>();
  p.validate();
  return p;
}

std::string to_string(MomentTag tag) {
  switch (tag) {
    case MomentTag::jacobi: return "m";
    case MomentTag::w: return "s";
    case MomentTag::w_normalized: return "r";
    case MomentTag::complement: return "m_complement";
  }
  return "unknown";
}

namespace {

MomentTag tag_from_string(const std::string& text) {
  for (MomentTag tag : {MomentTag::jacobi, MomentTag::w, MomentTag::w_normalized,
                        MomentTag::complement}) {
    if (to_string(tag) == text) return tag;
  }
  throw std::invalid_argument("unknown moment tag: " + text);
}

void flag_range(MomentVector& mv) {
  const auto& init = mv.params.init;
  const bool projection_type =
      init.empty() || std::all_of(init.begin(), init.end(), [](double v) { return v >= 0 && v <= 1; });
  if (!projection_type) return;
  for (const auto& row : mv.values) {
    for (double v : row) {
      if (v < -1e-9 || v > 1 + 1e-9) mv.range_violation = true;
    }
  }
}

}  // namespace

std::vector<double> MomentVector::column(unsigned n) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row.at(n));
  return out;
}

void MomentVector::write_csv(std::ostream& os) const {
  const auto saved = os.precision(17);
  const std::string prefix = to_string(tag);
  os << "t";
  for (std::size_t n = 0; n <= order(); ++n) os << ',' << prefix << '_' << n;
  os << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (double v : values[i]) os << ',' << v;
    os << '\n';
  }
  os.precision(saved);
}

nlohmann::json MomentVector::to_json() const {
  nlohmann::json j;
  j["params"] = params.to_json();
  j["tag"] = to_string(tag);
  j["t"] = t;
  j["values"] = values;
  j["range_violation"] = range_violation;
  return j;
}

MomentVector MomentVector::from_json(const nlohmann::json& j) {
  MomentVector mv;
  mv.params = JacobiParams::from_json(j.at("params"));
  mv.tag = tag_from_string(j.at("tag").get<std::string>());
  mv.t = j.at("t").get<std::vector<double>>();
  mv.values = j.at("values").get<std::vector<std::vector<double>>>();
  mv.range_violation = j.value("range_violation", false);
  if (mv.values.size() != mv.t.size()) throw std::invalid_argument("moment table size mismatch");
  return mv;
}

OdeRhs jacobi_rhs(const JacobiParams& params) {
  const double theta = to_double(params.theta);
  const double lt = to_double(params.lambda * params.theta);
  return [theta, lt](double, std::span<const double> m, std::span<double> dm) {
    dm[0] = 0.0;
    for (std::size_t n = 1; n < m.size(); ++n) {
      double sum = 0.0;
      for (std::size_t j = 0; j + 2 <= n; ++j) sum += m[n - j - 1] * (m[j] - m[j + 1]);
      const double nn = static_cast<double>(n);
      dm[n] = -nn * m[n] + nn * theta * m[n - 1] + nn * lt * sum;
    }
  };
}

namespace {

OdeRhs s_rhs(unsigned k) {
  const double kk = k;
  return [kk](double, std::span<const double> s, std::span<double> ds) {
    ds[0] = 0.0;
    for (std::size_t n = 1; n < s.size(); ++n) {
      double first = 0.0;
      double second = 0.0;
      for (std::size_t j = 0; j + 2 <= n; ++j) {
        first += s[n - j - 1] * s[j];
        second += s[n - j - 1] * s[j + 1];
      }
      const double nn = static_cast<double>(n);
      ds[n] = -nn * s[n] + nn * kk * s[n - 1] + nn * kk * first - nn / kk * second;
    }
  };
}

OdeRhs r_rhs(unsigned k) {
  const double kk = k;
  return [kk](double, std::span<const double> r, std::span<double> dr) {
    dr[0] = 0.0;
    for (std::size_t n = 1; n < r.size(); ++n) {
      double sum = 0.0;
      for (std::size_t j = 0; j + 2 <= n; ++j) sum += r[n - j - 1] * (r[j] - r[j + 1]);
      const double nn = static_cast<double>(n);
      dr[n] = -nn * r[n] + nn / kk * r[n - 1] + nn / kk * sum;
    }
  };
}

MomentVector from_solution(const JacobiParams& params, MomentTag tag, OdeSolution&& sol) {
  MomentVector mv;
  mv.params = params;
  mv.tag = tag;
  mv.t = std::move(sol.t);
  mv.values = std::move(sol.y);
  return mv;
}

}  // namespace

MomentVector integrate_moments(const JacobiParams& params, std::span<const double> t_grid,
                               const RichardsonOptions& options) {
  params.validate();
  auto sol = integrate_rk4(jacobi_rhs(params), params.initial_state(), t_grid, options);
  MomentVector mv = from_solution(params, MomentTag::jacobi, std::move(sol));
  flag_range(mv);
  return mv;
}

MomentVector integrate_moments(const JacobiParams& params, double t_end, double dt_hint,
                               const RichardsonOptions& options) {
  const auto grid = uniform_grid(t_end, dt_hint);
  return integrate_moments(params, grid, options);
}

MomentVector integrate_s_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                                 const RichardsonOptions& options) {
  JacobiParams params = JacobiParams::single_projection(k, n_max);
  std::vector<double> s0(n_max + 1);
  for (unsigned n = 0; n <= n_max; ++n) s0[n] = std::pow(static_cast<double>(k), 2.0 * n);
  auto sol = integrate_rk4(s_rhs(k), s0, t_grid, options);
  return from_solution(params, MomentTag::w, std::move(sol));
}

MomentVector integrate_r_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                                 const RichardsonOptions& options) {
  JacobiParams params = JacobiParams::single_projection(k, n_max);
  auto sol = integrate_rk4(r_rhs(k), std::vector<double>(n_max + 1, 1.0), t_grid, options);
  MomentVector mv = from_solution(params, MomentTag::w_normalized, std::move(sol));
  flag_range(mv);
  return mv;
}

WMoments integrate_w_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                             const RichardsonOptions& options) {
  WMoments out;
  out.s = integrate_s_moments(k, n_max, t_grid, options);
  out.r = out.s;
  out.r.tag = MomentTag::w_normalized;
  std::vector<double> scale(n_max + 1);
  for (unsigned n = 0; n <= n_max; ++n) scale[n] = std::pow(static_cast<double>(k), 2.0 * n);
  for (auto& row : out.r.values) {
    for (unsigned n = 0; n <= n_max; ++n) row[n] /= scale[n];
  }
  flag_range(out.r);

  const OdeRhs ds_rhs = s_rhs(k);
  const OdeRhs dr_rhs = r_rhs(k);
  std::vector<double> ds(n_max + 1);
  std::vector<double> dr(n_max + 1);
  for (std::size_t i = 0; i < out.s.t.size(); ++i) {
    ds_rhs(out.s.t[i], out.s.values[i], ds);
    dr_rhs(out.r.t[i], out.r.values[i], dr);
    for (unsigned n = 0; n <= n_max; ++n) {
      out.r_equation_residual = std::max(out.r_equation_residual, std::abs(ds[n] / scale[n] - dr[n]));
    }
  }
  if (!(out.r_equation_residual < 1e-9)) {
    throw ResidualError("normalized W moments violate their equation: residual " +
                        std::to_string(out.r_equation_residual));
  }
  return out;
}

WMoments integrate_w_moments(unsigned k, unsigned n_max, double t_end, double dt_hint) {
  const auto grid = uniform_grid(t_end, dt_hint);
  return integrate_w_moments(k, n_max, grid);
}

std::vector<Rational> stationary_moments_catalan(unsigned k, unsigned n_max) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  std::vector<Rational> m(n_max + 1);
  Rational value = 1;
  m[0] = value;
  for (unsigned j = 0; j < n_max; ++j) {
    value -= Rational(ipow(BigInt(k - 1), j + 1) * catalan(j), ipow(BigInt(k), 2 * j + 1));
    m[j + 1] = value;
  }
  return m;
}

std::vector<Rational> stationary_moments_appendix(unsigned k, unsigned n_max) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  const Rational x = make_rational(k - 2, k);
  std::vector<Rational> m(n_max + 1);
  for (unsigned n = 0; n <= n_max; ++n) {
    const BigInt km1_pow = ipow(BigInt(k - 1), n + 1);
    Rational bracket(binomial(2 * n, n));
    if (k != 2) {
      bracket -= Rational(BigInt(k - 2) * ipow(BigInt(k), n)) * p_script(n).evaluate(x) /
                 Rational(2 * factorial(n) * km1_pow);
    }
    m[n] = Rational(2 * km1_pow, ipow(BigInt(k), 2 * n + 1)) * bracket;
  }
  return m;
}

Rational PScriptPoly::evaluate(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + Rational(*it);
  return acc;
}

PScriptPoly p_script(unsigned n) {
  if (n > kMaxPScriptOrder) throw std::length_error("p_script: order exceeds guard");
  // Numerator L over 2^j (1+x)^{j+1} after j derivatives; start from x^{2n} / (1+x).
  std::vector<BigInt> num(2 * n + 1, BigInt(0));
  num[2 * n] = 1;
  for (unsigned j = 0; j < n; ++j) {
    const BigInt m = j + 1;  // current power of (1+x) in the denominator
    // d/dz = (1/(2x)) d/dx: new numerator is (L'(1+x) - m L) / x, one more (1+x).
    std::vector<BigInt> next(num.size() + 1, BigInt(0));
    for (std::size_t i = 1; i < num.size(); ++i) {
      const BigInt d = num[i] * static_cast<unsigned>(i);
      next[i - 1] += d;
      next[i] += d;
    }
    for (std::size_t i = 0; i < num.size(); ++i) next[i] -= m * num[i];
    if (next[0] != 0) throw std::logic_error("p_script: numerator is not divisible by x");
    next.erase(next.begin());
    while (!next.empty() && next.back() == 0) next.pop_back();
    num = std::move(next);
  }
  if (num.size() != n + 1) throw std::logic_error("p_script: unexpected degree");
  return PScriptPoly{n, std::move(num)};
}

Rational tk_trace(unsigned k, unsigned n) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  const BigInt km1 = k - 1;
  BigInt numerator_value = ipow(km1, n) + (n % 2 == 0 ? km1 : BigInt(-km1));
  const Rational binet(numerator_value, BigInt(k));

  BigInt h0 = 1;
  BigInt h1 = 0;
  for (unsigned i = 0; i < n; ++i) {
    BigInt h2 = BigInt(static_cast<int>(k) - 2) * h1 + km1 * h0;
    h0 = std::move(h1);
    h1 = std::move(h2);
  }
  if (Rational(h0) != binet) throw std::logic_error("tk_trace: Binet form disagrees with recurrence");
  return binet;
}

MomentVector complement_moments(const MomentVector& m) {
  if (!m.params.k) throw std::invalid_argument("complement_moments: k is required");
  const unsigned k = *m.params.k;
  if (m.params.lambda != 1 || m.params.theta != make_rational(1, k)) {
    throw std::invalid_argument("complement_moments: input must have theta = 1/k, lambda = 1");
  }
  MomentVector out = m;
  out.tag = MomentTag::complement;
  out.params.theta = make_rational(k - 1, k);
  const double kk = k;
  for (auto& row : out.values) {
    for (std::size_t n = 1; n < row.size(); ++n) row[n] = (row[n] + kk - 2.0) / (kk - 1.0);
  }
  if (!out.params.init.empty()) {
    for (std::size_t n = 1; n < out.params.init.size(); ++n) {
      out.params.init[n] = (out.params.init[n] + kk - 2.0) / (kk - 1.0);
    }
  }
  out.range_violation = false;
  flag_range(out);
  return out;
}

LargeKReport large_k_limit_check(double t, unsigned n, std::span<const unsigned> k_list) {
  LargeKReport report;
  report.t = t;
  report.n = n;
  RichardsonOptions options;
  options.tolerance = 1e-12;
  options.min_step = 1e-7;
  const std::vector<double> grid = t > 0 ? std::vector<double>{0.0, t} : std::vector<double>{0.0};
  unsigned previous_k = 0;
  for (unsigned k : k_list) {
    if (k <= previous_k) throw std::invalid_argument("large_k_limit_check: k_list must increase");
    previous_k = k;
    const double r = n == 0 ? 1.0 : integrate_r_moments(k, n, grid, options).values.back()[n];
    LargeKRow row;
    row.k = k;
    row.gap = std::abs(r - std::exp(-static_cast<double>(n) * t));
    row.scaled = row.gap * k;
    if (!report.rows.empty() && row.gap > report.rows.back().gap) report.decreasing = false;
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    double lo = report.rows.front().scaled;
    double hi = lo;
    for (const auto& row : report.rows) {
      lo = std::min(lo, row.scaled);
      hi = std::max(hi, row.scaled);
    }
    report.fitted_c = hi;
    report.stable = hi == 0.0 || hi <= 2.0 * lo;
  }
  return report;
}

std::vector<MpRow> mp_limit_check(unsigned n_max, unsigned k) {
  const auto stationary = stationary_moments_catalan(k, n_max);
  std::vector<MpRow> rows;
  for (unsigned n = 0; n <= n_max; ++n) {
    MpRow row;
    row.n = n;
    row.catalan = catalan(n);
    row.pochhammer_form = Rational(ipow(BigInt(4), n)) * pochhammer(make_rational(1, 2), n) /
                          Rational(factorial(n + 1));
    if (row.pochhammer_form != Rational(row.catalan)) {
      throw std::logic_error("mp_limit_check: Pochhammer form differs from Catalan number");
    }
    row.scaled_moment = Rational(ipow(BigInt(k), n)) * stationary[n];
    row.gap = std::abs(to_double(row.scaled_moment - Rational(row.catalan)));
    rows.push_back(std::move(row));
  }
  return rows;
}

double stationary_density(unsigned k, double x) {
  const double edge = stationary_support_edge(k);
  if (x <= 0.0 || x >= edge) return 0.0;
  const double kk = k;
  return std::sqrt(4.0 * (kk - 1.0) - kk * kk * x) /
         (2.0 * std::numbers::pi * std::sqrt(x) * (1.0 - x));
}

double stationary_cdf(unsigned k, double x) {
  const double edge = stationary_support_edge(k);
  if (x <= 0.0) return 0.0;
  if (x >= edge) return 1.0;
  // x = edge sin^2(phi); the antiderivative is
  // (k/pi) [phi - c arctan(c tan phi)] with c = (k-2)/k.
  const double kk = k;
  const double phi = std::asin(std::sqrt(x / edge));
  const double c = (kk - 2.0) / kk;
  return kk / std::numbers::pi * (phi - c * std::atan2(c * std::sin(phi), std::cos(phi)));
}

}  // namespace fjp
