#pragma once

// Moment ODE systems of the free Jacobi process and the sum of k free
// unitary Brownian motions, closed-form stationary moments, and the limit
// identities that tie them together.

#include "fjp/exact.hpp"
#include "fjp/ode.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fjp {

/// Parameters of d/dt m_n = -n m_n + n theta m_{n-1}
///   + n lambda theta sum_{j=0}^{n-2} m_{n-j-1} (m_j - m_{j+1}),
/// where tau(P) = lambda theta and tau(Q) = theta.
struct JacobiParams {
  std::optional<unsigned> k;
  Rational lambda = 1;
  Rational theta = 1;
  unsigned n_max = 1;
  /// m_0(0)..m_{n_max}(0); empty means the P = Q default m_n(0) = 1.
  std::vector<double> init;

  /// lambda = 1, theta = 1/k, default initial data.
  static JacobiParams single_projection(unsigned k, unsigned n_max);
  /// lambda = 1, theta = (k-1)/k, default initial data.
  static JacobiParams complement_projection(unsigned k, unsigned n_max);

  /// Throws std::invalid_argument when lambda, theta leave (0,1],
  /// lambda * theta > 1, n_max = 0, init has the wrong length or init[0] != 1.
  void validate() const;
  std::vector<double> initial_state() const;

  nlohmann::json to_json() const;
  static JacobiParams from_json(const nlohmann::json& j);
};

/// Which family a MomentVector holds: m_n = tau(J^n)/tau(P), s_n = tau(W^n),
/// r_n = s_n / k^{2n}, or the complement process.
enum class MomentTag { jacobi, w, w_normalized, complement };

std::string to_string(MomentTag tag);

struct MomentVector {
  JacobiParams params;
  MomentTag tag = MomentTag::jacobi;
  std::vector<double> t;
  std::vector<std::vector<double>> values;  // values[i][n] = moment n at t[i]
  /// Set when a projection-type moment left [0, 1] by more than 1e-9.
  bool range_violation = false;

  std::size_t order() const { return values.empty() ? 0 : values.front().size() - 1; }
  /// Column n as a time series.
  std::vector<double> column(unsigned n) const;

  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
  static MomentVector from_json(const nlohmann::json& j);
};

/// Right-hand side of the m-system for the given parameters.
OdeRhs jacobi_rhs(const JacobiParams& params);

MomentVector integrate_moments(const JacobiParams& params, std::span<const double> t_grid,
                               const RichardsonOptions& options = {});
/// Uniform grid of spacing about dt_hint on [0, t_end].
MomentVector integrate_moments(const JacobiParams& params, double t_end, double dt_hint,
                               const RichardsonOptions& options = {});

/// Integrates the s-system directly (with s_n(0) = k^{2n}) on the given grid.
MomentVector integrate_s_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                                 const RichardsonOptions& options = {});
/// Integrates the r-system d/dt r_n = -n r_n + (n/k) r_{n-1}
///   + (n/k) sum r_{n-j-1} (r_j - r_{j+1}) with r_n(0) = 1.
MomentVector integrate_r_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                                 const RichardsonOptions& options = {});

struct WMoments {
  MomentVector s;
  MomentVector r;
  /// max over grid and n of |d/dt r_n - rhs_r(r)_n| with d/dt r_n taken
  /// from the s-equation divided by k^{2n}.
  double r_equation_residual = 0.0;
};

class ResidualError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrates s_n, forms r_n = s_n / k^{2n} and checks that r satisfies its
/// own equation. Throws ResidualError when the residual reaches 1e-9.
WMoments integrate_w_moments(unsigned k, unsigned n_max, std::span<const double> t_grid,
                             const RichardsonOptions& options = {});
WMoments integrate_w_moments(unsigned k, unsigned n_max, double t_end, double dt_hint = 0.1);

/// m_n(inf) = 1 - sum_{j=0}^{n-1} (k-1)^{j+1} C_j / k^{2j+1}, n = 0..n_max.
std::vector<Rational> stationary_moments_catalan(unsigned k, unsigned n_max);

/// m_n(inf) = 2(k-1)^{n+1}/k^{2n+1} * [binom(2n, n)
///   - (k-2) k^n P_n((k-2)/k) / (2 n! (k-1)^{n+1})], n = 0..n_max.
std::vector<Rational> stationary_moments_appendix(unsigned k, unsigned n_max);

inline constexpr unsigned kMaxPScriptOrder = 40;

/// Polynomial P_n with d^n/dz^n [z^n / (1 + sqrt z)] = P_n(sqrt z) / (2^n (1 + sqrt z)^{n+1}).
struct PScriptPoly {
  unsigned n = 0;
  std::vector<BigInt> coeffs;  // coeffs[i] multiplies x^i

  Rational evaluate(const Rational& x) const;
};

/// Symbolic differentiation in x = sqrt z, tracking numerators over powers of
/// (1 + x). Throws std::length_error above kMaxPScriptOrder and
/// std::logic_error if a numerator stops being a polynomial.
PScriptPoly p_script(unsigned n);

/// tau(T_k^n) for T_k = kP - 1 with tau(P) = 1/k, by the Binet form
/// ((k-1)^n + (-1)^n (k-1)) / k. Throws std::logic_error if it disagrees with
/// h_{n+2} = (k-2) h_{n+1} + (k-1) h_n, h_0 = 1, h_1 = 0.
Rational tk_trace(unsigned k, unsigned n);

/// Normalized moments of (1-P) U (1-P) U* (1-P) from those of P U P U* P with
/// tau(P) = 1/k: n >= 1 maps to (m_n + k - 2) / (k - 1).
MomentVector complement_moments(const MomentVector& m);

struct LargeKRow {
  unsigned k = 0;
  double gap = 0.0;     // |r_n(t) - e^{-nt}|
  double scaled = 0.0;  // k * gap
};

struct LargeKReport {
  double t = 0.0;
  unsigned n = 0;
  std::vector<LargeKRow> rows;
  bool decreasing = true;
  /// C = max k * gap; stable when max / min of k * gap is at most 2.
  double fitted_c = 0.0;
  bool stable = true;
};

/// |r_n(t) - e^{-nt}| for each k in k_list (increasing).
LargeKReport large_k_limit_check(double t, unsigned n, std::span<const unsigned> k_list);

struct MpRow {
  unsigned n = 0;
  BigInt catalan;
  Rational pochhammer_form;   // 4^n (1/2)_n / (n+1)!
  Rational scaled_moment;     // k^n m_n(inf) = s_n(inf) / k^n
  double gap = 0.0;           // |scaled_moment - C_n|
};

/// Marchenko-Pastur comparison at a fixed large k. Throws std::logic_error if
/// the Pochhammer form ever differs from C_n.
std::vector<MpRow> mp_limit_check(unsigned n_max, unsigned k);

/// Density of the stationary law on [0, 4(k-1)/k^2]:
/// sqrt(4(k-1) - k^2 x) / (2 pi sqrt(x) (1 - x)).
double stationary_density(unsigned k, double x);
/// Its distribution function, in closed form.
double stationary_cdf(unsigned k, double x);
inline double stationary_support_edge(unsigned k) {
  return 4.0 * (k - 1.0) / (static_cast<double>(k) * k);
}

}  // namespace fjp
