#pragma once

// Generating functions of the free Jacobi moments and of T U T U*: the MGF
// relation, the transport pdes they satisfy, the k = 2 Laguerre series and
// the characteristic curves with their conserved quantity.

#include "fjp/moment_dynamics.hpp"
#include "fjp/series.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <iosfwd>
#include <span>
#include <type_traits>
#include <vector>

namespace fjp {

using Complex = std::complex<double>;

/// (1 - sqrt(1-z)) / (1 + sqrt(1-z)), principal branch. Throws
/// std::domain_error on the cut [1, inf).
Complex alpha_map(Complex z);
/// 4z / (1+z)^2. Throws std::domain_error at z = -1.
Complex alpha_inv(Complex z);

/// Series of (2 - k + sqrt(k^2 - 4(k-1)z)) / (2(1-z)) through order N.
RationalSeries stationary_mgf(unsigned k, unsigned order);
/// Closed form of the same function at a point, |z| < 1.
Complex stationary_mgf_value(unsigned k, Complex z);

/// b_n = sum_{j=0}^n binom(2n, n-j) a_j.
template <class T>
TruncatedSeries<T> binomial_transfer(const TruncatedSeries<T>& a);
/// Solves the unit lower-triangular system of binomial_transfer.
template <class T>
TruncatedSeries<T> inverse_binomial_transfer(const TruncatedSeries<T>& b);

/// Series of (k-1) z (1-z) / ((k-1-z)(1+z-kz)) through order N.
RationalSeries rho0_closed_form(unsigned k, unsigned order);

/// rho_{t,k}(z) = sum_j w_j(t) z^j / (k-1)^j with w_j = tau[(T U T U*)^j],
/// at one time.
struct RhoSnapshot {
  double t = 0.0;
  RealSeries rho;

  /// w_j = (k-1)^j rho_j.
  std::vector<double> w(unsigned k) const;
};

struct RhoSnapshots {
  unsigned k = 0;
  std::vector<RhoSnapshot> snapshots;

  nlohmann::json to_json() const;
};

/// Inverts m_n(t) = m_n(inf) + k^{1-2n} sum_j (k-1)^{n-j} binom(2n, n-j) w_j(t)
/// at every time of `m`. Requires lambda = 1, theta = 1/k; throws
/// std::invalid_argument on a parameter or order mismatch.
RhoSnapshots extract_rho_moments(const MomentVector& m, unsigned k);
RhoSnapshot extract_rho(std::span<const double> moments, unsigned k, double t = 0.0);

/// The forward map: moments m_0..m_N from rho_{t,k}.
std::vector<double> moments_from_rho(const RealSeries& rho, unsigned k);

/// Generalized Laguerre polynomial L_n^{(a)}(x) by its three-term recurrence.
double laguerre(unsigned n, double a, double x);

/// eta_{t,2}(z) = sum_{n>=1} L_{n-1}^{(1)}(2nt) z^n / n.
RealSeries eta_t2(double t, unsigned order);

/// Central time derivative of equally spaced snapshots at the middle one.
/// Three snapshots use the second-order stencil, five the fourth-order one.
/// Throws std::invalid_argument for any other count or a bad spacing.
RealSeries central_time_derivative(std::span<const RealSeries> snapshots, double spacing);

/// Series of (4(k-1) - k^2 A) / (4(k-1)(1-A)) with A = 4z/(1+z)^2.
RationalSeries pde0_prefactor(unsigned k, unsigned order);

/// |d/dt rho + z d/dz [rho + c rho^2]| coefficientwise at the middle snapshot,
/// for orders 0..N-2.
std::vector<double> pde0_residual(std::span<const RealSeries> rho_snapshots, double spacing,
                                  unsigned k);
/// Same for d/dt M = -(z/k) d/dz [(k-2) M + (1-z) M^2], M = sum m_n z^n.
std::vector<double> pde1_residual(std::span<const RealSeries> m_snapshots, double spacing,
                                  unsigned k);
/// Same for d/dt eta = -z d/dz [eta^2] (k = 2).
std::vector<double> pde2_k2_residual(std::span<const RealSeries> eta_snapshots, double spacing);

inline double max_of(const std::vector<double>& values) {
  double out = 0.0;
  for (double v : values) out = std::max(out, v);
  return out;
}

/// H(u) = (u+1)/(u-1).
Complex h_involution(Complex u);
/// (k^2 - (k-2)^2 y^2) / 4.
Complex lambda_tilde(unsigned k, Complex y);

struct CharacteristicOptions {
  unsigned order = 16;
  double output_step = 0.01;
  /// Largest allowed |rho_j z^j| over the last quarter of the series.
  double tail_limit = 1e-8;
  RichardsonOptions ode{1e-11, 1e-2, 1e-6};
};

/// Path of y = H(z) along the characteristic curve started at z0, with
/// f = rho_{t,k}(z(t)) / (k-1) read off the moments integrated jointly.
struct CharacteristicState {
  unsigned k = 0;
  Complex z0;
  Complex y0;
  Complex g0;  // lambda~(y0) f(0)^2 + f(0)
  std::vector<double> t;
  std::vector<Complex> y_path;
  std::vector<Complex> z_path;
  std::vector<Complex> f_path;
  std::vector<double> drift;  // |lambda~(y) f^2 + f - g0|
  double max_drift = 0.0;
  /// max |f - (-1 + sqrt(1 + 4 g0 lambda~(y))) / (2 lambda~(y))| along the path.
  double closed_form_gap = 0.0;
  /// The sqrt argument 1 + 4 g0 lambda~(y) crossed the negative real axis;
  /// the path stops at the crossing.
  bool branch_crossed = false;

  void write_csv(std::ostream& os) const;
};

/// Throws SeriesDivergence when the rho series fails the tail test at some
/// point of the path.
class SeriesDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CharacteristicState characteristic_trace(unsigned k, Complex z0, double t_end,
                                         const CharacteristicOptions& options = {});

/// max over times of m and samples z of
/// |sum m_n z^n - M_inf(z) - k^2 / sqrt(k^2 - 4(k-1)z) rho(alpha(4(k-1)z/k^2))|.
/// Throws std::domain_error when |z| >= 1 or a series fails the tail test.
double mgf_relation_check(const MomentVector& m, unsigned k, std::span<const Complex> z_samples,
                          double tail_limit = 1e-8);

// ---------------------------------------------------------------------------

namespace gf_detail {

template <class T>
T binomial_as(unsigned n, unsigned k) {
  if constexpr (std::is_same_v<T, Rational>) {
    return Rational(binomial(n, k));
  } else {
    return T(binomial(n, k).template convert_to<double>());
  }
}

}  // namespace gf_detail

template <class T>
TruncatedSeries<T> binomial_transfer(const TruncatedSeries<T>& a) {
  const unsigned order = a.order();
  TruncatedSeries<T> b(order);
  for (unsigned n = 0; n <= order; ++n) {
    T acc = T(0);
    for (unsigned j = 0; j <= n; ++j) acc += gf_detail::binomial_as<T>(2 * n, n - j) * a[j];
    b[n] = acc;
  }
  return b;
}

template <class T>
TruncatedSeries<T> inverse_binomial_transfer(const TruncatedSeries<T>& b) {
  const unsigned order = b.order();
  TruncatedSeries<T> a(order);
  for (unsigned n = 0; n <= order; ++n) {
    T acc = b[n];
    for (unsigned j = 0; j < n; ++j) acc -= gf_detail::binomial_as<T>(2 * n, n - j) * a[j];
    a[n] = acc;
  }
  return a;
}

}  // namespace fjp
