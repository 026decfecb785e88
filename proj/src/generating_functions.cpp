#include "fjp/generating_functions.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fjp {

Complex alpha_map(Complex z) {
  if (z.imag() == 0.0 && z.real() >= 1.0) {
    throw std::domain_error("alpha_map: argument on the cut [1, inf)");
  }
  const Complex root = std::sqrt(1.0 - z);
  return (1.0 - root) / (1.0 + root);
}

Complex alpha_inv(Complex z) {
  const Complex denom = (1.0 + z) * (1.0 + z);
  if (denom == 0.0) throw std::domain_error("alpha_inv: pole at -1");
  return 4.0 * z / denom;
}

RationalSeries stationary_mgf(unsigned k, unsigned order) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  RationalSeries radicand(order);
  radicand[0] = Rational(k * k);
  if (order >= 1) radicand[1] = Rational(-4 * static_cast<int>(k - 1));
  RationalSeries numer = radicand.sqrt();
  numer[0] += Rational(2 - static_cast<int>(k));
  RationalSeries one_minus_z = RationalSeries::constant(order, Rational(1)) - RationalSeries::variable(order);
  return numer * one_minus_z.reciprocal() / Rational(2);
}

Complex stationary_mgf_value(unsigned k, Complex z) {
  const double kk = k;
  return (2.0 - kk + std::sqrt(kk * kk - 4.0 * (kk - 1.0) * z)) / (2.0 * (1.0 - z));
}

RationalSeries rho0_closed_form(unsigned k, unsigned order) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  const Rational km1(k - 1);
  const RationalSeries one = RationalSeries::constant(order, Rational(1));
  const RationalSeries z = RationalSeries::variable(order);
  const RationalSeries numer = km1 * z * (one - z);
  const RationalSeries first = km1 * one - z;
  const RationalSeries second = one + Rational(1 - static_cast<int>(k)) * z;
  return numer * (first * second).reciprocal();
}

std::vector<double> RhoSnapshot::w(unsigned k) const {
  std::vector<double> out(rho.order() + 1);
  double scale = 1.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = rho[j] * scale;
    scale *= k - 1.0;
  }
  return out;
}

nlohmann::json RhoSnapshots::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : snapshots) list.push_back({{"t", s.t}, {"rho", s.rho.coeffs()}});
  j["snapshots"] = std::move(list);
  return j;
}

namespace {

// Precomputed pieces of the triangular system linking moments and rho.
class RhoMap {
 public:
  RhoMap(unsigned k, unsigned order) : k_(k), order_(order), stationary_(order + 1), scale_(order + 1) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    const auto exact = stationary_moments_catalan(k, order);
    for (unsigned n = 0; n <= order; ++n) {
      stationary_[n] = to_double(exact[n]);
      // k^{2n-1} / (k-1)^n
      scale_[n] = to_double(Rational(ipow(BigInt(k), 2 * n), BigInt(k)) / Rational(ipow(BigInt(k - 1), n)));
    }
  }

  RealSeries rho(std::span<const double> moments) const {
    if (moments.size() != order_ + 1) throw std::invalid_argument("rho extraction: order mismatch");
    RealSeries b(order_);
    for (unsigned n = 1; n <= order_; ++n) b[n] = (moments[n] - stationary_[n]) * scale_[n];
    return inverse_binomial_transfer(b);
  }

  std::vector<double> moments(const RealSeries& rho) const {
    if (rho.order() != order_) throw std::invalid_argument("moments_from_rho: order mismatch");
    const RealSeries b = binomial_transfer(rho);
    std::vector<double> m(order_ + 1);
    for (unsigned n = 0; n <= order_; ++n) m[n] = stationary_[n] + b[n] / scale_[n];
    return m;
  }

  unsigned k() const { return k_; }

 private:
  unsigned k_;
  unsigned order_;
  std::vector<double> stationary_;
  std::vector<double> scale_;
};

bool tail_ok(const RealSeries& s, double radius, double limit) {
  const unsigned order = s.order();
  const unsigned start = order - order / 4;
  for (unsigned j = start; j <= order; ++j) {
    if (std::abs(s[j]) * std::pow(radius, j) > limit) return false;
  }
  return true;
}

}  // namespace

RhoSnapshot extract_rho(std::span<const double> moments, unsigned k, double t) {
  if (moments.size() < 2) throw std::invalid_argument("rho extraction needs moments through order 1");
  const RhoMap map(k, static_cast<unsigned>(moments.size() - 1));
  return RhoSnapshot{t, map.rho(moments)};
}

RhoSnapshots extract_rho_moments(const MomentVector& m, unsigned k) {
  if (m.params.k && *m.params.k != k) throw std::invalid_argument("extract_rho_moments: k mismatch");
  if (m.params.lambda != 1 || m.params.theta != make_rational(1, k)) {
    throw std::invalid_argument("extract_rho_moments: moments must have lambda = 1, theta = 1/k");
  }
  if (m.tag != MomentTag::jacobi && m.tag != MomentTag::w_normalized) {
    throw std::invalid_argument("extract_rho_moments: unsupported moment family");
  }
  if (m.order() < 1) throw std::invalid_argument("extract_rho_moments: order mismatch");
  const RhoMap map(k, static_cast<unsigned>(m.order()));
  RhoSnapshots out;
  out.k = k;
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    if (m.values[i].size() != m.order() + 1) throw std::invalid_argument("extract_rho_moments: ragged table");
    out.snapshots.push_back(RhoSnapshot{m.t[i], map.rho(m.values[i])});
  }
  return out;
}

std::vector<double> moments_from_rho(const RealSeries& rho, unsigned k) {
  return RhoMap(k, rho.order()).moments(rho);
}

double laguerre(unsigned n, double a, double x) {
  double previous = 1.0;
  if (n == 0) return previous;
  double current = 1.0 + a - x;
  for (unsigned m = 1; m < n; ++m) {
    const double next = ((2.0 * m + 1.0 + a - x) * current - (m + a) * previous) / (m + 1.0);
    previous = current;
    current = next;
  }
  return current;
}

RealSeries eta_t2(double t, unsigned order) {
  if (t < 0) throw std::invalid_argument("eta_t2: t must be nonnegative");
  RealSeries eta(order);
  for (unsigned n = 1; n <= order; ++n) eta[n] = laguerre(n - 1, 1.0, 2.0 * n * t) / n;
  return eta;
}

RealSeries central_time_derivative(std::span<const RealSeries> snapshots, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("central difference: spacing must be positive");
  }
  const std::size_t count = snapshots.size();
  if (count != 3 && count != 5) {
    throw std::invalid_argument("central difference: need 3 or 5 snapshots");
  }
  for (const auto& s : snapshots) {
    if (s.order() != snapshots[0].order()) throw std::invalid_argument("series order mismatch");
  }
  if (count == 3) return (snapshots[2] - snapshots[0]) / (2.0 * spacing);
  return (snapshots[0] - 8.0 * snapshots[1] + 8.0 * snapshots[3] - snapshots[4]) / (12.0 * spacing);
}

RationalSeries pde0_prefactor(unsigned k, unsigned order) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  // With A = 4z/(1+z)^2 the prefactor is
  // (4(k-1)(1+z)^2 - 4k^2 z) / (4(k-1)(1-z)^2).
  const Rational km1(k - 1);
  const RationalSeries one = RationalSeries::constant(order, Rational(1));
  const RationalSeries z = RationalSeries::variable(order);
  const RationalSeries plus = one + z;
  const RationalSeries minus = one - z;
  const RationalSeries numer = Rational(4) * km1 * plus * plus - Rational(4 * k * k) * z;
  const RationalSeries denom = Rational(4) * km1 * minus * minus;
  return numer * denom.reciprocal();
}

namespace {

std::vector<double> residual_through(const RealSeries& lhs, const RealSeries& rhs) {
  const unsigned last = lhs.order() >= 2 ? lhs.order() - 2 : 0;
  std::vector<double> out(last + 1);
  for (unsigned n = 0; n <= last; ++n) out[n] = std::abs(lhs[n] - rhs[n]);
  return out;
}

const RealSeries& middle(std::span<const RealSeries> snapshots) {
  return snapshots[snapshots.size() / 2];
}

}  // namespace

std::vector<double> pde0_residual(std::span<const RealSeries> rho_snapshots, double spacing,
                                  unsigned k) {
  const RealSeries dt = central_time_derivative(rho_snapshots, spacing);
  const RealSeries& rho = middle(rho_snapshots);
  const RealSeries c = to_real(pde0_prefactor(k, rho.order()));
  const RealSeries flux = rho + c * (rho * rho);
  return residual_through(dt, -flux.euler_derivative());
}

std::vector<double> pde1_residual(std::span<const RealSeries> m_snapshots, double spacing,
                                  unsigned k) {
  const RealSeries dt = central_time_derivative(m_snapshots, spacing);
  const RealSeries& m = middle(m_snapshots);
  const unsigned order = m.order();
  const RealSeries one_minus_z = RealSeries::constant(order, 1.0) - RealSeries::variable(order);
  const RealSeries flux = (k - 2.0) * m + one_minus_z * (m * m);
  return residual_through(dt, -flux.euler_derivative() / static_cast<double>(k));
}

std::vector<double> pde2_k2_residual(std::span<const RealSeries> eta_snapshots, double spacing) {
  const RealSeries dt = central_time_derivative(eta_snapshots, spacing);
  const RealSeries& eta = middle(eta_snapshots);
  return residual_through(dt, -(eta * eta).euler_derivative());
}

Complex h_involution(Complex u) {
  if (u == 1.0) throw std::domain_error("H: pole at 1");
  return (u + 1.0) / (u - 1.0);
}

Complex lambda_tilde(unsigned k, Complex y) {
  const double kk = k;
  return (kk * kk - (kk - 2.0) * (kk - 2.0) * y * y) / 4.0;
}

void CharacteristicState::write_csv(std::ostream& os) const {
  const auto saved = os.precision(17);
  os << "t,re_y,im_y,re_f,im_f,drift,re_z,im_z\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i] << ',' << y_path[i].real() << ',' << y_path[i].imag() << ',' << f_path[i].real()
       << ',' << f_path[i].imag() << ',' << drift[i] << ',' << z_path[i].real() << ','
       << z_path[i].imag() << '\n';
  }
  os.precision(saved);
}

CharacteristicState characteristic_trace(unsigned k, Complex z0, double t_end,
                                         const CharacteristicOptions& options) {
  if (options.order < 4) throw std::invalid_argument("characteristic_trace: order must be at least 4");
  const unsigned order = options.order;
  const RhoMap map(k, order);
  const JacobiParams params = JacobiParams::single_projection(k, order);
  const OdeRhs moment_rhs = jacobi_rhs(params);
  const double tail_limit = options.tail_limit;
  const double km1 = k - 1.0;

  auto f_at = [&](std::span<const double> m, Complex y) {
    const RealSeries rho = map.rho(m);
    const Complex z = h_involution(y);
    if (!tail_ok(rho, std::abs(z), tail_limit)) {
      throw SeriesDivergence("characteristic_trace: rho series fails the tail test at |z| = " +
                             std::to_string(std::abs(z)));
    }
    return rho.evaluate(z) / km1;
  };

  // State: m_0..m_N, Re y, Im y.
  OdeRhs rhs = [&](double t, std::span<const double> state, std::span<double> d) {
    const auto m = state.first(order + 1);
    moment_rhs(t, m, d.first(order + 1));
    const Complex y(state[order + 1], state[order + 2]);
    const Complex f = f_at(m, y);
    const Complex dy = (1.0 - y * y) / 2.0 * (1.0 + 2.0 * lambda_tilde(k, y) * f);
    d[order + 1] = dy.real();
    d[order + 2] = dy.imag();
  };

  CharacteristicState state;
  state.k = k;
  state.z0 = z0;
  state.y0 = h_involution(z0);
  std::vector<double> initial = params.initial_state();
  initial.push_back(state.y0.real());
  initial.push_back(state.y0.imag());

  const auto grid = uniform_grid(t_end, options.output_step);
  const OdeSolution sol = integrate_rk4(rhs, initial, grid, options.ode);

  Complex previous_arg;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const auto& row = sol.y[i];
    const Complex y(row[order + 1], row[order + 2]);
    const Complex f = f_at(std::span<const double>(row).first(order + 1), y);
    const Complex lam = lambda_tilde(k, y);
    if (i == 0) state.g0 = lam * f * f + f;
    const Complex arg = 1.0 + 4.0 * state.g0 * lam;
    if (i > 0 && (arg.real() < 0.0 || previous_arg.real() < 0.0) &&
        std::signbit(arg.imag()) != std::signbit(previous_arg.imag())) {
      state.branch_crossed = true;
      break;
    }
    previous_arg = arg;
    const Complex closed = (-1.0 + std::sqrt(arg)) / (2.0 * lam);
    state.t.push_back(sol.t[i]);
    state.y_path.push_back(y);
    state.z_path.push_back(h_involution(y));
    state.f_path.push_back(f);
    const double drift = std::abs(lam * f * f + f - state.g0);
    state.drift.push_back(drift);
    state.max_drift = std::max(state.max_drift, drift);
    state.closed_form_gap = std::max(state.closed_form_gap, std::abs(f - closed));
  }
  return state;
}

double mgf_relation_check(const MomentVector& m, unsigned k, std::span<const Complex> z_samples,
                          double tail_limit) {
  const RhoSnapshots rho = extract_rho_moments(m, k);
  const double kk = k;
  double worst = 0.0;
  for (const Complex z : z_samples) {
    if (!(std::abs(z) < 1.0)) throw std::domain_error("mgf_relation_check: |z| must be below 1");
    const Complex w = 4.0 * (kk - 1.0) * z / (kk * kk);
    const Complex a = alpha_map(w);
    const Complex prefactor = kk * kk / std::sqrt(kk * kk - 4.0 * (kk - 1.0) * z);
    const Complex stationary = stationary_mgf_value(k, z);
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      const RealSeries moments(static_cast<unsigned>(m.order()), m.values[i]);
      if (!tail_ok(moments, std::abs(z), tail_limit) ||
          !tail_ok(rho.snapshots[i].rho, std::abs(a), tail_limit)) {
        throw std::domain_error("mgf_relation_check: z outside the usable radius");
      }
      const Complex lhs = moments.evaluate(z);
      const Complex rhs = stationary + prefactor * rho.snapshots[i].rho.evaluate(a);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

}  // namespace fjp
