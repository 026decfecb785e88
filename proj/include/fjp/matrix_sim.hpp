#pragma once

// Finite-N Monte Carlo of k independent unitary Brownian motions: the
// density matrix built from their sum, the normalized radial part W/k^2 and
// compressions P U Q U* P by diagonal projections.
//
// Time normalization: the generator G has entry covariance 1/N and each step
// multiplies by exp(i G sqrt(dt)). The large-N limit is then the free unitary
// Brownian motion with tau(U_t) = exp(-t/2), with no further rescaling.

#include "fjp/exact.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fjp {

using CMatrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
/// Counter-derived subseed so trajectory streams do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory, std::uint64_t stream = 0);

/// How exp(i G sqrt(dt)) is drawn for a fresh GUE matrix G.
///   eigendecomposition: sample G entrywise, diagonalize, exponentiate.
///   spectral: draw the same law as V diag(exp(i l sqrt(dt))) V* with V Haar
///     and l the GUE spectrum from the tridiagonal beta = 2 model.
enum class StepMethod { spectral, eigendecomposition };

std::string to_string(StepMethod method);
/// Throws std::invalid_argument for an unknown name.
StepMethod step_method_from_string(std::string_view name);

/// Hermitian Gaussian matrix: real N(0, 1/n) diagonal, complex off-diagonal
/// entries with E|G_ij|^2 = 1/n.
CMatrix sample_gue(unsigned n, Rng& rng);
/// Eigenvalues of sample_gue(n) drawn directly, ascending.
Eigen::VectorXd sample_gue_spectrum(unsigned n, Rng& rng);
/// Haar unitary from the QR factorization of a complex Ginibre matrix with
/// the phases of R moved into Q.
CMatrix sample_haar_unitary(unsigned n, Rng& rng);

CMatrix ubm_increment(unsigned n, double dt, Rng& rng, StepMethod method);

/// max |U*U - I| entrywise.
double unitarity_defect(const CMatrix& u);

class UnitarityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replaces u by its unitary polar factor (Newton-Schulz iteration). Throws
/// UnitarityError if the defect is still at least 1e-8 afterwards.
void polar_reproject(CMatrix& u);

class UnitaryBrownianMotion {
 public:
  struct Options {
    StepMethod method = StepMethod::spectral;
    unsigned reproject_every = 100;
  };

  UnitaryBrownianMotion(unsigned n, double dt, Options options);
  UnitaryBrownianMotion(unsigned n, double dt) : UnitaryBrownianMotion(n, dt, Options{}) {}

  void step(Rng& rng);
  void advance(unsigned steps, Rng& rng);

  const CMatrix& state() const { return u_; }
  unsigned steps() const { return steps_; }
  double time() const { return dt_ * steps_; }
  /// Largest defect seen right before each re-projection and at the end.
  double max_defect() const;

 private:
  unsigned n_;
  double dt_;
  Options options_;
  CMatrix u_;
  CMatrix scratch_;
  unsigned steps_ = 0;
  double max_defect_ = 0.0;
};

/// U_0 = I followed by `steps` geometric Euler steps; every record_every-th
/// state (and the last) is kept.
std::vector<CMatrix> evolve_ubm(unsigned n, double dt, unsigned steps, Rng& rng,
                                StepMethod method = StepMethod::spectral, unsigned record_every = 1);

/// G G* with G the sum of the unitaries.
CMatrix gram_of_sum(std::span<const CMatrix> unitaries);
/// G G* / tr(G G*). Throws std::domain_error when the trace vanishes.
CMatrix build_density_matrix(std::span<const CMatrix> unitaries);

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m);

inline constexpr unsigned kMaxEmpiricalMoment = 12;

/// (1/N) sum lambda^n for n = 0..n_max. Throws std::invalid_argument above
/// kMaxEmpiricalMoment.
std::vector<double> empirical_moments(std::span<const double> eigenvalues, unsigned n_max);
std::vector<double> empirical_moments(const CMatrix& m, unsigned n_max);

struct Observables {
  bool density_matrix = true;
  bool w_moments = true;
  bool compressed_jacobi = false;
  bool complement = false;
};

struct SimConfig {
  unsigned N = 200;
  unsigned k = 3;
  double t_end = 1.0;
  double dt = 1e-3;
  unsigned trajectories = 50;
  std::uint64_t seed = 1;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  unsigned n_moments = 3;
  /// Empty means {t_end}. Each time must be a multiple of dt.
  std::vector<double> observation_times;
  Observables observables;
  StepMethod method = StepMethod::spectral;
  unsigned reproject_every = 100;
  bool keep_samples = false;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  std::vector<double> resolved_times() const;
  nlohmann::json to_json() const;
};

/// Ranks of P and Q as fractions of N.
struct ProjectionRanks {
  Rational p;
  Rational q;
};

struct SpectralSample {
  std::string observable;
  std::vector<double> eigenvalues;  // ascending
  unsigned N = 0;
  unsigned k = 0;
  double t = 0.0;
  unsigned trajectory = 0;
  std::uint64_t seed = 0;
  unsigned steps = 0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  /// |mean - target| within `sigmas` standard errors.
  bool within(double target, double sigmas = 3.0) const;
};

MeanSe mean_and_se(std::span<const double> values);

struct ObservationStats {
  double t = 0.0;
  unsigned steps = 0;
  MeanSe trace_u;          // tr(U)/N, averaged over the motions of a trajectory
  MeanSe gram_trace;       // tr(G G*)/N
  std::vector<MeanSe> r;   // moments of W/k^2, n = 0..n_moments
  std::vector<MeanSe> compressed;  // moments of P U Q U* P in the range of P
  std::vector<MeanSe> complement;  // same for 1-P, 1-Q
  double density_trace_error = 0.0;       // max |tr W~ - 1|
  double density_min_eigenvalue = 0.0;    // min over trajectories
  double normalized_max_eigenvalue = 0.0; // max eigenvalue of W/k^2
};

struct SimulationResult {
  SimConfig config;
  std::vector<ObservationStats> observations;
  std::vector<SpectralSample> samples;
  double max_unitarity_defect = 0.0;
  double wall_seconds = 0.0;
  unsigned threads_used = 1;

  nlohmann::json summary_json() const;
  /// One row per eigenvalue: observable,trajectory,seed,N,k,t,steps,index,eigenvalue.
  void write_samples_csv(std::ostream& os) const;
};

/// k independent motions per trajectory; density matrix and W/k^2 observables.
SimulationResult simulate(const SimConfig& config);

/// One motion per trajectory; P = diag(1..1, 0..0) of rank pN, Q likewise of
/// rank qN. Compressed moments are normalized by pN, complement ones by N - pN.
/// Throws std::invalid_argument when pN or qN is not an integer.
SimulationResult simulate_compressed_jacobi(const SimConfig& config, const ProjectionRanks& ranks);

}  // namespace fjp
