#include "fjp/matrix_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace fjp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ trajectory) ^ stream);
}

std::string to_string(StepMethod method) {
  return method == StepMethod::spectral ? "spectral" : "eigendecomposition";
}

StepMethod step_method_from_string(std::string_view name) {
  if (name == "spectral") return StepMethod::spectral;
  if (name == "eigendecomposition") return StepMethod::eigendecomposition;
  throw std::invalid_argument("unknown step method: " + std::string(name));
}

CMatrix sample_gue(unsigned n, Rng& rng) {
  std::normal_distribution<double> normal;
  const double diag_scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double off_scale = 1.0 / std::sqrt(2.0 * n);
  CMatrix g(n, n);
  for (unsigned j = 0; j < n; ++j) {
    g(j, j) = normal(rng) * diag_scale;
    for (unsigned i = j + 1; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = std::complex<double>(re, im) * off_scale;
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

Eigen::VectorXd sample_gue_spectrum(unsigned n, Rng& rng) {
  // Tridiagonal model: N(0,1) diagonal, sqrt(Gamma(m, 1)) off the diagonal
  // for m = n-1, ..., 1, all scaled by 1/sqrt(n).
  std::normal_distribution<double> normal;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 0 ? n - 1 : 0);
  for (unsigned i = 0; i < n; ++i) diag(i) = normal(rng) * scale;
  for (unsigned i = 0; i + 1 < n; ++i) {
    std::gamma_distribution<double> gamma(static_cast<double>(n - 1 - i), 1.0);
    sub(i) = std::sqrt(gamma(rng)) * scale;
  }
  if (n == 1) return diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

CMatrix sample_haar_unitary(unsigned n, Rng& rng) {
  std::normal_distribution<double> normal;
  CMatrix z(n, n);
  for (unsigned j = 0; j < n; ++j) {
    for (unsigned i = 0; i < n; ++i) z(i, j) = std::complex<double>(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (unsigned j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0) q.col(j) *= d / mag;
  }
  return q;
}

namespace {

// exp(i G sqrt(dt)) = V diag(phases) V*.
struct Increment {
  CMatrix v;
  Eigen::VectorXcd phases;
};

Increment draw_increment(unsigned n, double dt, Rng& rng, StepMethod method) {
  Increment inc;
  Eigen::VectorXd lambda;
  if (method == StepMethod::spectral) {
    inc.v = sample_haar_unitary(n, rng);
    lambda = sample_gue_spectrum(n, rng);
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sample_gue(n, rng));
    inc.v = solver.eigenvectors();
    lambda = solver.eigenvalues();
  }
  const double root = std::sqrt(dt);
  inc.phases.resize(n);
  for (unsigned i = 0; i < n; ++i) inc.phases(i) = std::polar(1.0, lambda(i) * root);
  return inc;
}

}  // namespace

CMatrix ubm_increment(unsigned n, double dt, Rng& rng, StepMethod method) {
  const Increment inc = draw_increment(n, dt, rng, method);
  return inc.v * inc.phases.asDiagonal() * inc.v.adjoint();
}

double unitarity_defect(const CMatrix& u) {
  CMatrix gram = u.adjoint() * u;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

void polar_reproject(CMatrix& u) {
  const auto n = u.rows();
  double defect = unitarity_defect(u);
  if (!(defect < 0.5)) throw UnitarityError("polar re-projection: matrix too far from unitary");
  for (int iter = 0; iter < 8 && defect > 1e-15; ++iter) {
    CMatrix correction = -(u.adjoint() * u);
    correction.diagonal().array() += 3.0;
    u = (u * correction * 0.5).eval();
    defect = unitarity_defect(u);
  }
  (void)n;
  if (!(defect < 1e-8)) throw UnitarityError("polar re-projection did not restore unitarity");
}

UnitaryBrownianMotion::UnitaryBrownianMotion(unsigned n, double dt, Options options)
    : n_(n), dt_(dt), options_(options), u_(CMatrix::Identity(n, n)), scratch_(n, n) {
  if (n == 0) throw std::invalid_argument("matrix size must be positive");
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (options_.reproject_every == 0) throw std::invalid_argument("reproject_every must be positive");
}

void UnitaryBrownianMotion::step(Rng& rng) {
  const Increment inc = draw_increment(n_, dt_, rng, options_.method);
  scratch_.noalias() = u_ * inc.v;
  scratch_ = scratch_ * inc.phases.asDiagonal();
  u_.noalias() = scratch_ * inc.v.adjoint();
  ++steps_;
  if (steps_ % options_.reproject_every == 0) {
    max_defect_ = std::max(max_defect_, unitarity_defect(u_));
    polar_reproject(u_);
  }
}

void UnitaryBrownianMotion::advance(unsigned steps, Rng& rng) {
  for (unsigned i = 0; i < steps; ++i) step(rng);
}

double UnitaryBrownianMotion::max_defect() const {
  return std::max(max_defect_, unitarity_defect(u_));
}

std::vector<CMatrix> evolve_ubm(unsigned n, double dt, unsigned steps, Rng& rng, StepMethod method,
                                unsigned record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be positive");
  UnitaryBrownianMotion motion(n, dt, {method, 100});
  std::vector<CMatrix> path{motion.state()};
  for (unsigned s = 1; s <= steps; ++s) {
    motion.step(rng);
    if (s % record_every == 0 || s == steps) path.push_back(motion.state());
  }
  return path;
}

CMatrix gram_of_sum(std::span<const CMatrix> unitaries) {
  if (unitaries.empty()) throw std::invalid_argument("gram_of_sum: no matrices");
  CMatrix g = unitaries[0];
  for (std::size_t j = 1; j < unitaries.size(); ++j) {
    if (unitaries[j].rows() != g.rows() || unitaries[j].cols() != g.cols()) {
      throw std::invalid_argument("gram_of_sum: size mismatch");
    }
    g += unitaries[j];
  }
  CMatrix out = g * g.adjoint();
  return out;
}

CMatrix build_density_matrix(std::span<const CMatrix> unitaries) {
  CMatrix gram = gram_of_sum(unitaries);
  const double trace = gram.trace().real();
  if (!(trace > 0)) throw std::domain_error("density matrix: zero trace");
  gram /= trace;
  return gram;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::vector<double> empirical_moments(std::span<const double> eigenvalues, unsigned n_max) {
  if (n_max > kMaxEmpiricalMoment) throw std::invalid_argument("empirical_moments: order exceeds guard");
  if (eigenvalues.empty()) throw std::invalid_argument("empirical_moments: no eigenvalues");
  std::vector<double> moments(n_max + 1, 0.0);
  for (double lambda : eigenvalues) {
    double power = 1.0;
    for (unsigned n = 0; n <= n_max; ++n) {
      moments[n] += power;
      power *= lambda;
    }
  }
  for (double& m : moments) m /= static_cast<double>(eigenvalues.size());
  return moments;
}

std::vector<double> empirical_moments(const CMatrix& m, unsigned n_max) {
  const Eigen::VectorXd eig = hermitian_eigenvalues(m);
  return empirical_moments(std::span<const double>(eig.data(), static_cast<std::size_t>(eig.size())),
                           n_max);
}

void SimConfig::validate() const {
  if (N == 0) throw std::invalid_argument("N must be positive");
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be nonnegative");
  if (trajectories == 0) throw std::invalid_argument("trajectories must be positive");
  if (n_moments > kMaxEmpiricalMoment) throw std::invalid_argument("n_moments exceeds guard");
  if (reproject_every == 0) throw std::invalid_argument("reproject_every must be positive");
  for (double t : resolved_times()) {
    if (t < 0 || t > t_end + 1e-12) throw std::invalid_argument("observation time outside [0, t_end]");
    const double steps = std::round(t / dt);
    if (std::abs(steps * dt - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("observation times must be multiples of dt");
    }
  }
}

std::vector<double> SimConfig::resolved_times() const {
  std::vector<double> times = observation_times.empty() ? std::vector<double>{t_end} : observation_times;
  std::sort(times.begin(), times.end());
  return times;
}

nlohmann::json SimConfig::to_json() const {
  return {{"N", N},
          {"k", k},
          {"t_end", t_end},
          {"dt", dt},
          {"trajectories", trajectories},
          {"seed", seed},
          {"threads", threads},
          {"n_moments", n_moments},
          {"observation_times", resolved_times()},
          {"observables",
           {{"density_matrix", observables.density_matrix},
            {"w_moments", observables.w_moments},
            {"compressed_jacobi", observables.compressed_jacobi},
            {"complement", observables.complement}}},
          {"method", to_string(method)},
          {"reproject_every", reproject_every}};
}

bool MeanSe::within(double target, double sigmas) const {
  return std::abs(mean - target) <= sigmas * se;
}

MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    out.se = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

namespace {

// Per-trajectory values at one observation time.
struct Snapshot {
  double trace_u = 0.0;
  double gram_trace = 0.0;
  std::vector<double> r;
  std::vector<double> compressed;
  std::vector<double> complement;
  double density_trace_error = 0.0;
  double density_min_eigenvalue = 0.0;
  double normalized_max_eigenvalue = 0.0;
  std::vector<SpectralSample> samples;
};

struct TrajectoryRecord {
  std::vector<Snapshot> snapshots;
  double max_defect = 0.0;
};

std::vector<unsigned> step_indices(const SimConfig& config) {
  std::vector<unsigned> out;
  for (double t : config.resolved_times()) out.push_back(static_cast<unsigned>(std::lround(t / config.dt)));
  return out;
}

SpectralSample make_sample(std::string observable, const Eigen::VectorXd& eig, const SimConfig& config,
                           double t, unsigned trajectory, unsigned steps) {
  SpectralSample s;
  s.observable = std::move(observable);
  s.eigenvalues.assign(eig.data(), eig.data() + eig.size());
  s.N = config.N;
  s.k = config.k;
  s.t = t;
  s.trajectory = trajectory;
  s.seed = derive_seed(config.seed, trajectory);
  s.steps = steps;
  return s;
}

template <class Work>
std::vector<TrajectoryRecord> run_trajectories(const SimConfig& config, unsigned& threads_used,
                                               Work&& work) {
  std::vector<TrajectoryRecord> records(config.trajectories);
  unsigned threads = config.threads != 0 ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, config.trajectories);
  threads_used = threads;
  std::atomic<unsigned> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const unsigned j = next.fetch_add(1);
      if (j >= config.trajectories) return;
      try {
        records[j] = work(j);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.trajectories);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<MeanSe> reduce_vectors(const std::vector<TrajectoryRecord>& records, std::size_t obs,
                                   std::vector<double> Snapshot::*field) {
  const std::size_t width = (records.front().snapshots[obs].*field).size();
  std::vector<MeanSe> out(width);
  std::vector<double> column(records.size());
  for (std::size_t n = 0; n < width; ++n) {
    for (std::size_t j = 0; j < records.size(); ++j) column[j] = (records[j].snapshots[obs].*field)[n];
    out[n] = mean_and_se(column);
  }
  return out;
}

MeanSe reduce_scalar(const std::vector<TrajectoryRecord>& records, std::size_t obs, double Snapshot::*field) {
  std::vector<double> column(records.size());
  for (std::size_t j = 0; j < records.size(); ++j) column[j] = records[j].snapshots[obs].*field;
  return mean_and_se(column);
}

SimulationResult reduce(const SimConfig& config, std::vector<TrajectoryRecord>&& records) {
  SimulationResult result;
  result.config = config;
  const auto times = config.resolved_times();
  const auto steps = step_indices(config);
  for (std::size_t obs = 0; obs < times.size(); ++obs) {
    ObservationStats stats;
    stats.t = times[obs];
    stats.steps = steps[obs];
    stats.trace_u = reduce_scalar(records, obs, &Snapshot::trace_u);
    stats.gram_trace = reduce_scalar(records, obs, &Snapshot::gram_trace);
    stats.r = reduce_vectors(records, obs, &Snapshot::r);
    stats.compressed = reduce_vectors(records, obs, &Snapshot::compressed);
    stats.complement = reduce_vectors(records, obs, &Snapshot::complement);
    stats.density_min_eigenvalue = records.front().snapshots[obs].density_min_eigenvalue;
    for (const auto& rec : records) {
      const Snapshot& s = rec.snapshots[obs];
      stats.density_trace_error = std::max(stats.density_trace_error, s.density_trace_error);
      stats.density_min_eigenvalue = std::min(stats.density_min_eigenvalue, s.density_min_eigenvalue);
      stats.normalized_max_eigenvalue = std::max(stats.normalized_max_eigenvalue, s.normalized_max_eigenvalue);
    }
    result.observations.push_back(std::move(stats));
  }
  for (auto& rec : records) {
    result.max_unitarity_defect = std::max(result.max_unitarity_defect, rec.max_defect);
    for (auto& s : rec.snapshots) {
      for (auto& sample : s.samples) result.samples.push_back(std::move(sample));
    }
  }
  return result;
}

}  // namespace

SimulationResult simulate(const SimConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto times = config.resolved_times();
  const auto steps = step_indices(config);
  const double kk2 = static_cast<double>(config.k) * config.k;

  auto work = [&](unsigned trajectory) {
    std::vector<Rng> rngs;
    std::vector<UnitaryBrownianMotion> motions;
    for (unsigned j = 0; j < config.k; ++j) {
      rngs.emplace_back(derive_seed(config.seed, trajectory, j));
      motions.emplace_back(config.N, config.dt,
                           UnitaryBrownianMotion::Options{config.method, config.reproject_every});
    }
    TrajectoryRecord record;
    unsigned done = 0;
    std::vector<CMatrix> states(config.k);
    for (std::size_t obs = 0; obs < times.size(); ++obs) {
      for (unsigned j = 0; j < config.k; ++j) motions[j].advance(steps[obs] - done, rngs[j]);
      done = steps[obs];
      Snapshot snap;
      for (unsigned j = 0; j < config.k; ++j) {
        states[j] = motions[j].state();
        snap.trace_u += states[j].trace().real() / config.N;
      }
      snap.trace_u /= config.k;
      CMatrix gram = gram_of_sum(states);
      const double trace = gram.trace().real();
      snap.gram_trace = trace / config.N;
      if (config.observables.density_matrix) {
        const CMatrix rho = gram / trace;
        const Eigen::VectorXd eig = hermitian_eigenvalues(rho);
        snap.density_trace_error = std::abs(rho.trace().real() - 1.0);
        snap.density_min_eigenvalue = eig.minCoeff();
        if (config.keep_samples) {
          snap.samples.push_back(make_sample("density_matrix", eig, config, times[obs], trajectory, done));
        }
      }
      if (config.observables.w_moments) {
        const Eigen::VectorXd eig = hermitian_eigenvalues(gram / kk2);
        snap.r = empirical_moments(std::span<const double>(eig.data(), static_cast<std::size_t>(eig.size())),
                                   config.n_moments);
        snap.normalized_max_eigenvalue = eig.maxCoeff();
        if (config.keep_samples) {
          snap.samples.push_back(make_sample("w_normalized", eig, config, times[obs], trajectory, done));
        }
      }
      record.snapshots.push_back(std::move(snap));
    }
    for (const auto& m : motions) record.max_defect = std::max(record.max_defect, m.max_defect());
    return record;
  };

  unsigned threads_used = 1;
  auto records = run_trajectories(config, threads_used, work);
  SimulationResult result = reduce(config, std::move(records));
  result.threads_used = threads_used;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SimulationResult simulate_compressed_jacobi(const SimConfig& config, const ProjectionRanks& ranks) {
  config.validate();
  auto rank_of = [&](const Rational& fraction) {
    if (fraction <= 0 || fraction > 1) throw std::invalid_argument("projection rank fraction must lie in (0,1]");
    const Rational r = fraction * Rational(config.N);
    if (denominator(r) != 1) throw std::invalid_argument("rank fraction times N must be an integer");
    return static_cast<unsigned>(numerator(r).convert_to<unsigned long>());
  };
  const unsigned p = rank_of(ranks.p);
  const unsigned q = rank_of(ranks.q);
  const bool complement = config.observables.complement;
  if (complement && (p == config.N || q == config.N)) {
    throw std::invalid_argument("complement needs proper projections");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto times = config.resolved_times();
  const auto steps = step_indices(config);

  auto work = [&](unsigned trajectory) {
    Rng rng(derive_seed(config.seed, trajectory, 0));
    UnitaryBrownianMotion motion(config.N, config.dt,
                                 UnitaryBrownianMotion::Options{config.method, config.reproject_every});
    TrajectoryRecord record;
    unsigned done = 0;
    for (std::size_t obs = 0; obs < times.size(); ++obs) {
      motion.advance(steps[obs] - done, rng);
      done = steps[obs];
      const CMatrix& u = motion.state();
      Snapshot snap;
      snap.trace_u = u.trace().real() / config.N;
      const CMatrix a = u.topLeftCorner(p, q);
      const Eigen::VectorXd eig = hermitian_eigenvalues(a * a.adjoint());
      snap.compressed = empirical_moments(
          std::span<const double>(eig.data(), static_cast<std::size_t>(eig.size())), config.n_moments);
      if (config.keep_samples) {
        snap.samples.push_back(make_sample("compressed_jacobi", eig, config, times[obs], trajectory, done));
      }
      if (complement) {
        const CMatrix b = u.bottomRightCorner(config.N - p, config.N - q);
        const Eigen::VectorXd ceig = hermitian_eigenvalues(b * b.adjoint());
        snap.complement = empirical_moments(
            std::span<const double>(ceig.data(), static_cast<std::size_t>(ceig.size())), config.n_moments);
        if (config.keep_samples) {
          snap.samples.push_back(make_sample("complement", ceig, config, times[obs], trajectory, done));
        }
      }
      record.snapshots.push_back(std::move(snap));
    }
    record.max_defect = motion.max_defect();
    return record;
  };

  unsigned threads_used = 1;
  auto records = run_trajectories(config, threads_used, work);
  SimulationResult result = reduce(config, std::move(records));
  result.threads_used = threads_used;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

nlohmann::json to_json(const MeanSe& v) { return {{"mean", v.mean}, {"se", v.se}}; }

nlohmann::json to_json(const std::vector<MeanSe>& values) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : values) out.push_back(to_json(v));
  return out;
}

}  // namespace

nlohmann::json SimulationResult::summary_json() const {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : observations) {
    obs.push_back({{"t", o.t},
                   {"steps", o.steps},
                   {"trace_u", to_json(o.trace_u)},
                   {"gram_trace", to_json(o.gram_trace)},
                   {"r", to_json(o.r)},
                   {"compressed", to_json(o.compressed)},
                   {"complement", to_json(o.complement)},
                   {"density_trace_error", o.density_trace_error},
                   {"density_min_eigenvalue", o.density_min_eigenvalue},
                   {"normalized_max_eigenvalue", o.normalized_max_eigenvalue}});
  }
  return {{"config", config.to_json()},
          {"observations", std::move(obs)},
          {"max_unitarity_defect", max_unitarity_defect},
          {"wall_seconds", wall_seconds},
          {"threads_used", threads_used}};
}

void SimulationResult::write_samples_csv(std::ostream& os) const {
  const auto saved = os.precision(17);
  os << "observable,trajectory,seed,N,k,t,steps,index,eigenvalue\n";
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      os << s.observable << ',' << s.trajectory << ',' << s.seed << ',' << s.N << ',' << s.k << ','
         << s.t << ',' << s.steps << ',' << i << ',' << s.eigenvalues[i] << '\n';
    }
  }
  os.precision(saved);
}

}  // namespace fjp
