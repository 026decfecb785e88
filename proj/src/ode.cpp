#include "fjp/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fjp {

namespace {

class Rk4Stepper {
 public:
  Rk4Stepper(const OdeRhs& rhs, std::size_t dim)
      : rhs_(rhs), k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  void step(double t, double h, std::vector<double>& y) {
    const std::size_t n = y.size();
    rhs_(t, y, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    rhs_(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    rhs_(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    rhs_(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  const OdeRhs& rhs_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

// One pass over the grid; each interval is cut into equal substeps no longer
// than `h`.
std::vector<std::vector<double>> sweep(const OdeRhs& rhs, const std::vector<double>& y0,
                                       std::span<const double> grid, double h) {
  Rk4Stepper stepper(rhs, y0.size());
  std::vector<std::vector<double>> out;
  out.reserve(grid.size());
  std::vector<double> y = y0;
  out.push_back(y);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double span = grid[i] - grid[i - 1];
    const auto substeps = static_cast<long>(std::ceil(span / h - 1e-9));
    const double dt = span / static_cast<double>(std::max(1L, substeps));
    double t = grid[i - 1];
    for (long s = 0; s < std::max(1L, substeps); ++s) {
      stepper.step(t, dt, y);
      t += dt;
    }
    for (double v : y) {
      if (!std::isfinite(v)) {
        throw OdeError("non-finite state at t=" + std::to_string(grid[i]));
      }
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

OdeSolution integrate_rk4(const OdeRhs& rhs, std::vector<double> y0,
                          std::span<const double> t_grid, const RichardsonOptions& options) {
  if (t_grid.empty()) throw std::invalid_argument("integrate_rk4: empty grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("integrate_rk4: grid must be strictly increasing");
    }
  }
  OdeSolution solution;
  solution.t.assign(t_grid.begin(), t_grid.end());
  if (t_grid.size() == 1) {
    solution.y = {std::move(y0)};
    return solution;
  }

  double h = options.initial_step;
  auto coarse = sweep(rhs, y0, t_grid, h);
  while (true) {
    const double half = 0.5 * h;
    if (half < options.min_step) {
      throw OdeError("tolerance not reached at minimum step");
    }
    auto fine = sweep(rhs, y0, t_grid, half);
    double worst = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      for (std::size_t c = 0; c < fine[i].size(); ++c) {
        const double scale = std::max(1.0, std::abs(fine[i][c]));
        worst = std::max(worst, std::abs(fine[i][c] - coarse[i][c]) / scale);
      }
    }
    h = half;
    if (worst < options.tolerance) {
      for (std::size_t i = 0; i < fine.size(); ++i) {
        for (std::size_t c = 0; c < fine[i].size(); ++c) {
          fine[i][c] += (fine[i][c] - coarse[i][c]) / 15.0;
        }
      }
      solution.y = std::move(fine);
      solution.step = h;
      solution.max_difference = worst;
      return solution;
    }
    coarse = std::move(fine);
  }
}

std::vector<double> uniform_grid(double t_end, double spacing) {
  if (!(t_end >= 0.0) || !(spacing > 0.0)) {
    throw std::invalid_argument("uniform_grid: need t_end >= 0 and spacing > 0");
  }
  if (t_end == 0.0) return {0.0};
  const auto intervals = static_cast<std::size_t>(std::ceil(t_end / spacing - 1e-9));
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    grid[i] = t_end * static_cast<double>(i) / static_cast<double>(intervals);
  }
  return grid;
}

}  // namespace fjp
