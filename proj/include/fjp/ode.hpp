#pragma once

// Classic fourth-order Runge-Kutta with Richardson step-halving control.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fjp {

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct RichardsonOptions {
  /// Successive solutions (step h vs h/2) must agree to tolerance * max(1, |y|)
  /// per component at every output time.
  double tolerance = 1e-10;
  /// Largest internal step tried first.
  double initial_step = 1e-2;
  /// Halving stops with an error once the step would drop below this.
  double min_step = 1e-6;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<std::vector<double>> y;  // y[i] is the state at t[i]
  double step = 0.0;                   // finest internal step used
  double max_difference = 0.0;         // last successive-solution gap
};

class OdeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrates y' = f(t, y) from t_grid.front() (where y = y0) and reports the
/// state at every grid time. The returned values are the Richardson
/// extrapolation (16 y_{h/2} - y_h) / 15 of the last two passes.
/// Throws OdeError on a non-finite state or when the tolerance cannot be met
/// above min_step; std::invalid_argument for a non-increasing grid.
OdeSolution integrate_rk4(const OdeRhs& rhs, std::vector<double> y0,
                          std::span<const double> t_grid, const RichardsonOptions& options = {});

/// Uniform grid 0, h, 2h, ..., t_end with h = t_end / ceil(t_end / spacing).
std::vector<double> uniform_grid(double t_end, double spacing);

}  // namespace fjp
