#pragma once

// Monte Carlo engine for the lifted system
//   dU = e(X) dt,  dX = -sum_j a_j U_j e_j'(X) dt + sigma dB
// (additive noise on a flat circle, so Stratonovich and Ito agree), the exact
// transition of the collapsed OU process, ensemble statistics and
// goodness-of-fit distances against the invariant law.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "srd/model.hpp"

namespace srd {

enum class Scheme { euler_maruyama, strang_splitting };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::strang_splitting;
  std::uint64_t seed = 0;
  double sigma = 1.0;

  /// Throws ValidationError for dt <= 0 or sigma < 0. Returns warnings:
  /// stiff step (dt * max a_j|lambda_j| >= 0.1) and sigma = 0.
  [[nodiscard]] std::vector<std::string> validate(const SpectralModel& model) const;
};

/// Per-trajectory random stream. Stream i of seed s is an mt19937_64 seeded
/// with the seed_seq {lo(s), hi(s), lo(i), hi(i)} after splitmix64 mixing of
/// both words, so streams are reproducible and independent of scheduling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);
  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

/// One step with a caller-supplied standard normal draw.
SystemState step(const SpectralModel& model, const SystemState& state, const IntegratorConfig& config, double noise);

/// In-place variant for hot loops; `e` and `de` are scratch buffers of size d.
void step_inplace(const SpectralModel& model, SystemState& state, const IntegratorConfig& config, double noise,
                  std::vector<double>& e, std::vector<double>& de);

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
};

using StateObserver = std::function<void(double t, const SystemState&)>;

/// Runs n_steps and calls `observe` at t = 0 and every `record_every` steps.
/// The noise comes from StreamRng(config.seed, stream).
void simulate_stream(const SpectralModel& model, const SystemState& initial, const IntegratorConfig& config,
                     std::uint64_t n_steps, std::uint64_t record_every, std::uint64_t stream,
                     const StateObserver& observe);

Trajectory simulate_trajectory(const SpectralModel& model, const SystemState& initial,
                               const IntegratorConfig& config, std::uint64_t n_steps,
                               std::uint64_t record_every = 1, std::uint64_t stream = 0);

/// Draw (u, x) from mu (x) kappa.
SystemState sample_invariant_state(const SpectralModel& model, StreamRng& rng);

/// Exact OU transition over time t from z0.
std::vector<double> sample_ou_exact(std::span<const double> z0, double t, const SpectralModel& model, StreamRng& rng);

/// Welford mean / variance, mergeable with Chan's update.
struct MomentAccumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v);
  void merge(const MomentAccumulator& o);
  [[nodiscard]] double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
};

/// Lagged product sums for one observable; mergeable by addition.
struct LagAccumulator {
  std::vector<double> n, sum_a, sum_b, sum_ab;

  explicit LagAccumulator(std::size_t max_lag = 0)
      : n(max_lag + 1), sum_a(max_lag + 1), sum_b(max_lag + 1), sum_ab(max_lag + 1) {}
  void add_series(std::span<const double> series);
  void merge(const LagAccumulator& o);
  [[nodiscard]] double autocovariance(std::size_t lag) const;
  [[nodiscard]] double autocorrelation(std::size_t lag) const;
};

/// Statistics of an ensemble: moments of every U coordinate, circular
/// histogram of X, autocorrelation of U_j and cos(X/L) along each recorded
/// path, and the raw endpoint samples for distribution tests.
struct EnsembleStats {
  std::size_t d = 0;
  double L = 1.0;
  double record_dt = 0.0;
  std::vector<MomentAccumulator> u_moments;
  std::vector<std::uint64_t> x_histogram;
  std::vector<LagAccumulator> autocorr;  // d + 1 observables
  std::vector<std::vector<double>> u_samples;
  std::vector<double> x_samples;

  EnsembleStats() = default;
  EnsembleStats(std::size_t dims, double L, std::size_t n_bins, std::size_t max_lag, double record_dt);

  void add_sample(const SystemState& s);
  void merge(const EnsembleStats& o);
  [[nodiscard]] std::vector<double> histogram_mass() const;
  [[nodiscard]] std::size_t sample_count() const { return x_samples.size(); }
};

struct EnsembleConfig {
  std::uint64_t n_trajectories = 1000;
  std::uint64_t n_steps = 1000;
  std::uint64_t record_every = 100;
  std::size_t n_bins = 32;
  std::size_t max_lag = 50;  // in records
};

/// Independent trajectories started from the invariant law; the endpoint of
/// each trajectory is one sample, the recorded path feeds the autocorrelation.
EnsembleStats run_stationary_ensemble(const SpectralModel& model, const IntegratorConfig& config,
                                      const EnsembleConfig& ensemble);

struct AutocorrelationTime {
  double tau = 1.0;         // 1 + 2 sum_{t=1}^{window} rho(t), in sample units
  std::size_t window = 0;
};

/// Integrated autocorrelation time with the self-consistent window
/// M >= c tau(M).
AutocorrelationTime integrated_autocorrelation_time(std::span<const double> series, double c = 5.0);

/// One long stationary run thinned by the largest integrated autocorrelation
/// time over the U coordinates and cos(X/L).
struct ThinnedRun {
  std::vector<std::vector<double>> u_samples;
  std::vector<double> x_samples;
  double tau = 1.0;  // in records
  std::size_t stride = 1;
  double effective_samples = 0.0;
};

ThinnedRun long_run_thinned(const SpectralModel& model, const IntegratorConfig& config, std::uint64_t n_steps,
                            std::uint64_t record_every);

/// One-sample KS distance against N(0, variance).
double ks_gaussian(std::vector<double> samples, double variance);
/// Kuiper distance of points on [0, 2 pi L) against the uniform law.
double kuiper_uniform(std::vector<double> x, double L);
/// Asymptotic tail probabilities with the usual small-sample corrections.
double ks_pvalue(double D, std::size_t n);
double kuiper_pvalue(double V, std::size_t n);
double ks_critical_value(std::size_t n, double alpha);
double kuiper_critical_value(std::size_t n, double alpha);

struct DistributionReport {
  std::vector<double> ks_u;
  double kuiper_x = 0.0;
  std::size_t n_samples = 0;
  double effective_samples = 0.0;
  double ks_critical_1pct = 0.0;
  double kuiper_critical_1pct = 0.0;
};

/// Throws InsufficientSamplesError when effective_samples < min_effective.
DistributionReport ks_circular_and_gaussian(const std::vector<std::vector<double>>& u_samples,
                                            const std::vector<double>& x_samples, double effective_samples,
                                            const InvariantLaw& law, double L, double min_effective = 1e4);

/// Long-format CSV: section,name,index,value.
void write_stats_csv(std::ostream& os, const EnsembleStats& stats, const DistributionReport* report);

/// Little-endian float64 trajectory dump. Header: 8-byte magic "SRDTRAJ1",
/// uint64 model hash, uint64 d, uint64 record count; then per record
/// t, u_1..u_d, x.
void write_trajectory_binary(std::ostream& os, const Trajectory& traj, std::uint64_t model_hash);
Trajectory read_trajectory_binary(std::istream& is, std::uint64_t* model_hash = nullptr);

}  // namespace srd
