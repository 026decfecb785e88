#pragma once

// Tidy CSV tables for external plotting tools.

#include "fjp/generating_functions.hpp"
#include "fjp/matrix_sim.hpp"
#include "fjp/moment_dynamics.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fjp::cli {

enum class PlotKind { histogram, moment_vs_t, residual, characteristic };

std::string to_string(PlotKind kind);
/// Throws std::invalid_argument for an unknown name.
PlotKind plot_kind_from_string(std::string_view name);

struct ResidualRow {
  std::string check;
  unsigned k = 0;
  double t = 0.0;
  unsigned order = 0;
  double residual = 0.0;
};

/// Inputs for emit_plot_data; each kind reads only its own fields.
struct PlotInputs {
  // histogram
  std::vector<double> eigenvalues;
  unsigned k = 0;
  unsigned bins = 40;
  // moment-vs-t
  const MomentVector* ode = nullptr;
  const SimulationResult* simulation = nullptr;
  // residual
  std::vector<ResidualRow> residuals;
  // characteristic
  const CharacteristicState* characteristic = nullptr;
};

/// Throws std::invalid_argument when the inputs for `kind` are missing.
void emit_plot_data(PlotKind kind, const PlotInputs& inputs, std::ostream& os);

/// bin_left,bin_right,bin_center,count,empirical_density,stationary_density
/// over [0, 4(k-1)/k^2] with the stationary density at bin centers.
void write_histogram_csv(std::ostream& os, std::span<const double> eigenvalues, unsigned k, unsigned bins);

/// t,n,ode,mc_mean,mc_se; the Monte Carlo columns are empty where the
/// simulation has no observation. Simulation moments are r_n (W/k^2), or the
/// compressed moments when r is empty.
void write_moment_vs_t_csv(std::ostream& os, const MomentVector& ode, const SimulationResult* simulation);

/// check,k,t,order,residual
void write_residual_csv(std::ostream& os, std::span<const ResidualRow> rows);

}  // namespace fjp::cli
