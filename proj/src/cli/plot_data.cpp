#include "fjp/cli/plot_data.hpp"

#include "fjp/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fjp::cli {

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::histogram: return "histogram";
    case PlotKind::moment_vs_t: return "moment-vs-t";
    case PlotKind::residual: return "residual";
    case PlotKind::characteristic: return "characteristic";
  }
  return "histogram";
}

PlotKind plot_kind_from_string(std::string_view name) {
  for (PlotKind k : {PlotKind::histogram, PlotKind::moment_vs_t, PlotKind::residual, PlotKind::characteristic}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown plot kind: " + std::string(name));
}

void emit_plot_data(PlotKind kind, const PlotInputs& inputs, std::ostream& os) {
  switch (kind) {
    case PlotKind::histogram:
      if (inputs.eigenvalues.empty() || inputs.k < 2) throw std::invalid_argument("histogram: no eigenvalues");
      write_histogram_csv(os, inputs.eigenvalues, inputs.k, inputs.bins);
      return;
    case PlotKind::moment_vs_t:
      if (inputs.ode == nullptr) throw std::invalid_argument("moment-vs-t: no ODE moments");
      write_moment_vs_t_csv(os, *inputs.ode, inputs.simulation);
      return;
    case PlotKind::residual:
      if (inputs.residuals.empty()) throw std::invalid_argument("residual: no rows");
      write_residual_csv(os, inputs.residuals);
      return;
    case PlotKind::characteristic:
      if (inputs.characteristic == nullptr) throw std::invalid_argument("characteristic: no path");
      inputs.characteristic->write_csv(os);
      return;
  }
}

void write_histogram_csv(std::ostream& os, std::span<const double> eigenvalues, unsigned k, unsigned bins) {
  if (bins == 0) throw std::invalid_argument("histogram: zero bins");
  const double edge = stationary_support_edge(k);
  const double width = edge / bins;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : eigenvalues) {
    auto b = static_cast<long>(std::floor(x / width));
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double total = static_cast<double>(eigenvalues.size());
  os << "bin_left,bin_right,bin_center,count,empirical_density,stationary_density\n";
  for (unsigned b = 0; b < bins; ++b) {
    const double left = b * width;
    const double center = left + width / 2;
    os << format_double(left) << ',' << format_double(left + width) << ',' << format_double(center) << ','
       << counts[b] << ',' << format_double(counts[b] / (total * width)) << ','
       << format_double(stationary_density(k, center)) << '\n';
  }
}

void write_moment_vs_t_csv(std::ostream& os, const MomentVector& ode, const SimulationResult* simulation) {
  os << "t,n,ode,mc_mean,mc_se\n";
  for (std::size_t i = 0; i < ode.t.size(); ++i) {
    const ObservationStats* obs = nullptr;
    if (simulation != nullptr) {
      for (const auto& o : simulation->observations) {
        if (std::abs(o.t - ode.t[i]) < 1e-9) obs = &o;
      }
    }
    for (std::size_t n = 0; n < ode.values[i].size(); ++n) {
      os << format_double(ode.t[i]) << ',' << n << ',' << format_double(ode.values[i][n]) << ',';
      if (obs != nullptr) {
        const auto& stats = obs->r.empty() ? obs->compressed : obs->r;
        if (n < stats.size()) os << format_double(stats[n].mean) << ',' << format_double(stats[n].se);
        else os << ',';
      } else {
        os << ',';
      }
      os << '\n';
    }
  }
}

void write_residual_csv(std::ostream& os, std::span<const ResidualRow> rows) {
  os << "check,k,t,order,residual\n";
  for (const auto& r : rows) {
    os << r.check << ',' << r.k << ',' << format_double(r.t) << ',' << r.order << ',' << format_double(r.residual)
       << '\n';
  }
}

}  // namespace fjp::cli
