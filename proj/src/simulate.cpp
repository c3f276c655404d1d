#include "srd/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "srd/csv.hpp"
#include "srd/errors.hpp"

namespace srd {

Scheme parse_scheme(const std::string& name) {
  if (name == "euler_maruyama") return Scheme::euler_maruyama;
  if (name == "strang_splitting") return Scheme::strang_splitting;
  throw ValidationError("integrator.scheme must be euler_maruyama or strang_splitting, got '" + name + "'");
}

std::string to_string(Scheme s) { return s == Scheme::euler_maruyama ? "euler_maruyama" : "strang_splitting"; }

std::vector<std::string> IntegratorConfig::validate(const SpectralModel& model) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("integrator.dt must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
  std::vector<std::string> warnings;
  double stiff = 0.0;
  for (std::size_t j = 0; j < model.dim(); ++j) stiff = std::max(stiff, model.stiffness(j));
  if (dt * stiff >= 0.1)
    warnings.push_back("dt * max a_j|lambda_j| = " + std::to_string(dt * stiff) + " >= 0.1; step may be too stiff");
  if (sigma == 0.0)
    warnings.push_back("sigma = 0: the invariant law mu (x) kappa is possibly not unique");
  return warnings;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream ^ 0xd1b54a32d192ed03ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

void step_inplace(const SpectralModel& model, SystemState& s, const IntegratorConfig& config, double noise,
                  std::vector<double>& e, std::vector<double>& de) {
  const std::size_t d = model.dim();
  const double dt = config.dt;
  const auto& a = model.coefficients();
  const double kick = config.sigma * std::sqrt(dt) * noise;

  model.evaluate(s.x, e, de);
  if (config.scheme == Scheme::euler_maruyama) {
    double dx = 0.0;
    for (std::size_t j = 0; j < d; ++j) dx -= a[j] * s.u[j] * de[j];
    for (std::size_t j = 0; j < d; ++j) s.u[j] += e[j] * dt;
    s.x = wrap_to_torus(s.x + dx * dt + kick, model.L());
    return;
  }
  // Strang: exact half step in u with x frozen, Euler-Maruyama in x with u
  // frozen, second half step in u.
  for (std::size_t j = 0; j < d; ++j) s.u[j] += 0.5 * dt * e[j];
  double dx = 0.0;
  for (std::size_t j = 0; j < d; ++j) dx -= a[j] * s.u[j] * de[j];
  s.x = wrap_to_torus(s.x + dx * dt + kick, model.L());
  model.evaluate(s.x, e, de);
  for (std::size_t j = 0; j < d; ++j) s.u[j] += 0.5 * dt * e[j];
}

SystemState step(const SpectralModel& model, const SystemState& state, const IntegratorConfig& config, double noise) {
  if (state.u.size() != model.dim()) throw ValidationError("step: state has wrong dimension");
  if (!(config.dt > 0.0)) throw ValidationError("step: dt must be positive");
  SystemState out = state;
  std::vector<double> e(model.dim()), de(model.dim());
  step_inplace(model, out, config, noise, e, de);
  return out;
}

void simulate_stream(const SpectralModel& model, const SystemState& initial, const IntegratorConfig& config,
                     std::uint64_t n_steps, std::uint64_t record_every, std::uint64_t stream,
                     const StateObserver& observe) {
  if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
  if (record_every < 1) throw ValidationError("record_every must be >= 1");
  StreamRng rng(config.seed, stream);
  SystemState s = initial;
  s.x = wrap_to_torus(s.x, model.L());
  std::vector<double> e(model.dim()), de(model.dim());
  observe(0.0, s);
  for (std::uint64_t i = 1; i <= n_steps; ++i) {
    const double noise = config.sigma > 0.0 ? rng.normal() : 0.0;
    step_inplace(model, s, config, noise, e, de);
    if (i % record_every == 0) observe(static_cast<double>(i) * config.dt, s);
  }
}

Trajectory simulate_trajectory(const SpectralModel& model, const SystemState& initial,
                               const IntegratorConfig& config, std::uint64_t n_steps, std::uint64_t record_every,
                               std::uint64_t stream) {
  Trajectory traj;
  simulate_stream(model, initial, config, n_steps, record_every, stream, [&](double t, const SystemState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
  });
  return traj;
}

SystemState sample_invariant_state(const SpectralModel& model, StreamRng& rng) {
  const auto law = invariant_law(model);
  SystemState s;
  s.u.resize(model.dim());
  for (std::size_t j = 0; j < model.dim(); ++j) s.u[j] = std::sqrt(law.gaussian_variances[j]) * rng.normal();
  s.x = wrap_to_torus(rng.uniform() * circumference(model.L()), model.L());
  return s;
}

std::vector<double> sample_ou_exact(std::span<const double> z0, double t, const SpectralModel& model,
                                    StreamRng& rng) {
  if (!(t >= 0.0)) throw ValidationError("sample_ou_exact: t must be >= 0");
  if (z0.size() != model.dim()) throw ValidationError("sample_ou_exact: z0 has wrong dimension");
  std::vector<double> z(z0.begin(), z0.end());
  if (t == 0.0) return z;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double s = model.stiffness(j);
    const double theta = s / (2.0 * model.volume());
    const double decay = std::exp(-theta * t);
    const double var = -std::expm1(-2.0 * theta * t) / s;
    z[j] = decay * z[j] + std::sqrt(var) * rng.normal();
  }
  return z;
}

void MomentAccumulator::add(double v) {
  count += 1.0;
  const double delta = v - mean;
  mean += delta / count;
  m2 += delta * (v - mean);
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.count == 0.0) return;
  if (count == 0.0) {
    *this = o;
    return;
  }
  const double n = count + o.count;
  const double delta = o.mean - mean;
  mean += delta * o.count / n;
  m2 += o.m2 + delta * delta * count * o.count / n;
  count = n;
}

void LagAccumulator::add_series(std::span<const double> series) {
  const std::size_t max_lag = n.size() - 1;
  for (std::size_t lag = 0; lag <= max_lag && lag < series.size(); ++lag)
    for (std::size_t t = 0; t + lag < series.size(); ++t) {
      n[lag] += 1.0;
      sum_a[lag] += series[t];
      sum_b[lag] += series[t + lag];
      sum_ab[lag] += series[t] * series[t + lag];
    }
}

void LagAccumulator::merge(const LagAccumulator& o) {
  if (o.n.size() != n.size()) throw std::invalid_argument("LagAccumulator::merge: lag grids differ");
  for (std::size_t i = 0; i < n.size(); ++i) {
    n[i] += o.n[i];
    sum_a[i] += o.sum_a[i];
    sum_b[i] += o.sum_b[i];
    sum_ab[i] += o.sum_ab[i];
  }
}

double LagAccumulator::autocovariance(std::size_t lag) const {
  if (n[lag] == 0.0) return 0.0;
  return sum_ab[lag] / n[lag] - (sum_a[lag] / n[lag]) * (sum_b[lag] / n[lag]);
}

double LagAccumulator::autocorrelation(std::size_t lag) const {
  const double c0 = autocovariance(0);
  return c0 > 0.0 ? autocovariance(lag) / c0 : 0.0;
}

EnsembleStats::EnsembleStats(std::size_t dims, double L_, std::size_t n_bins, std::size_t max_lag, double rdt)
    : d(dims),
      L(L_),
      record_dt(rdt),
      u_moments(dims),
      x_histogram(n_bins, 0),
      autocorr(dims + 1, LagAccumulator(max_lag)),
      u_samples(dims) {}

void EnsembleStats::add_sample(const SystemState& s) {
  for (std::size_t j = 0; j < d; ++j) {
    u_moments[j].add(s.u[j]);
    u_samples[j].push_back(s.u[j]);
  }
  const double frac = s.x / circumference(L);
  auto bin = static_cast<std::size_t>(frac * static_cast<double>(x_histogram.size()));
  x_histogram[std::min(bin, x_histogram.size() - 1)] += 1;
  x_samples.push_back(s.x);
}

void EnsembleStats::merge(const EnsembleStats& o) {
  if (o.d != d || o.x_histogram.size() != x_histogram.size())
    throw std::invalid_argument("EnsembleStats::merge: incompatible statistics");
  for (std::size_t j = 0; j < d; ++j) {
    u_moments[j].merge(o.u_moments[j]);
    u_samples[j].insert(u_samples[j].end(), o.u_samples[j].begin(), o.u_samples[j].end());
  }
  for (std::size_t b = 0; b < x_histogram.size(); ++b) x_histogram[b] += o.x_histogram[b];
  for (std::size_t k = 0; k < autocorr.size(); ++k) autocorr[k].merge(o.autocorr[k]);
  x_samples.insert(x_samples.end(), o.x_samples.begin(), o.x_samples.end());
}

std::vector<double> EnsembleStats::histogram_mass() const {
  std::uint64_t total = 0;
  for (auto c : x_histogram) total += c;
  std::vector<double> mass(x_histogram.size(), 0.0);
  if (total == 0) return mass;
  for (std::size_t b = 0; b < mass.size(); ++b) mass[b] = static_cast<double>(x_histogram[b]) / total;
  return mass;
}

EnsembleStats run_stationary_ensemble(const SpectralModel& model, const IntegratorConfig& config,
                                      const EnsembleConfig& ens) {
  (void)config.validate(model);
  if (ens.n_trajectories < 1) throw ValidationError("integrator.n_trajectories must be >= 1");
  const std::size_t d = model.dim();
  EnsembleStats total(d, model.L(), ens.n_bins, ens.max_lag, config.dt * static_cast<double>(ens.record_every));
  std::vector<std::vector<double>> series(d + 1);
  for (std::uint64_t traj = 0; traj < ens.n_trajectories; ++traj) {
    // Initial state and path noise come from separate streams of the same seed.
    StreamRng init_rng(config.seed, 2 * traj + 1);
    const SystemState start = sample_invariant_state(model, init_rng);
    for (auto& s : series) s.clear();
    SystemState last;
    simulate_stream(model, start, config, ens.n_steps, ens.record_every, 2 * traj, [&](double, const SystemState& s) {
      for (std::size_t j = 0; j < d; ++j) series[j].push_back(s.u[j]);
      series[d].push_back(std::cos(s.x / model.L()));
      last = s;
    });
    total.add_sample(last);
    for (std::size_t k = 0; k <= d; ++k) total.autocorr[k].add_series(series[k]);
  }
  return total;
}

AutocorrelationTime integrated_autocorrelation_time(std::span<const double> series, double c) {
  const std::size_t n = series.size();
  AutocorrelationTime out;
  if (n < 4) return out;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (series[t] - mean) * (series[t + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return out;
  double tau = 1.0;
  for (std::size_t m = 1; m < n / 2; ++m) {
    tau += 2.0 * autocov(m) / c0;
    if (static_cast<double>(m) >= c * tau) {
      out.tau = std::max(tau, 1.0);
      out.window = m;
      return out;
    }
  }
  out.tau = std::max(tau, 1.0);
  out.window = n / 2;
  return out;
}

ThinnedRun long_run_thinned(const SpectralModel& model, const IntegratorConfig& config, std::uint64_t n_steps,
                            std::uint64_t record_every) {
  (void)config.validate(model);
  const std::size_t d = model.dim();
  StreamRng init_rng(config.seed, 1);
  const SystemState start = sample_invariant_state(model, init_rng);
  std::vector<std::vector<double>> u(d);
  std::vector<double> x, cx;
  simulate_stream(model, start, config, n_steps, record_every, 0, [&](double, const SystemState& s) {
    for (std::size_t j = 0; j < d; ++j) u[j].push_back(s.u[j]);
    x.push_back(s.x);
    cx.push_back(std::cos(s.x / model.L()));
  });
  ThinnedRun out;
  out.tau = integrated_autocorrelation_time(cx).tau;
  for (std::size_t j = 0; j < d; ++j) out.tau = std::max(out.tau, integrated_autocorrelation_time(u[j]).tau);
  out.stride = static_cast<std::size_t>(std::ceil(out.tau));
  out.u_samples.resize(d);
  for (std::size_t i = 0; i < x.size(); i += out.stride) {
    for (std::size_t j = 0; j < d; ++j) out.u_samples[j].push_back(u[j][i]);
    out.x_samples.push_back(x[i]);
  }
  out.effective_samples = static_cast<double>(x.size()) / out.tau;
  return out;
}

double ks_gaussian(std::vector<double> samples, double variance) {
  if (samples.empty()) throw std::invalid_argument("ks_gaussian: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double scale = std::sqrt(2.0 * variance);
  double D = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = 0.5 * std::erfc(-samples[i] / scale);
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return D;
}

double kuiper_uniform(std::vector<double> x, double L) {
  if (x.empty()) throw std::invalid_argument("kuiper_uniform: no samples");
  for (auto& v : x) v = wrap_to_torus(v, L) / circumference(L);
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double dplus = 0.0, dminus = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dplus = std::max(dplus, (static_cast<double>(i) + 1.0) / n - x[i]);
    dminus = std::max(dminus, x[i] - static_cast<double>(i) / n);
  }
  return dplus + dminus;
}

double ks_pvalue(double D, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.12 + 0.11 / sn) * D;
  if (lam < 0.2) return 1.0;
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lam * lam);
    q += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

double kuiper_pvalue(double V, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.155 + 0.24 / sn) * V;
  if (lam < 0.4) return 1.0;
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double l2 = j * j * lam * lam;
    const double term = 2.0 * (4.0 * l2 - 1.0) * std::exp(-2.0 * l2);
    q += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

namespace {

template <typename P>
double invert_pvalue(P pvalue, std::size_t n, double alpha) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pvalue(mid, n) > alpha ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

double ks_critical_value(std::size_t n, double alpha) { return invert_pvalue(ks_pvalue, n, alpha); }
double kuiper_critical_value(std::size_t n, double alpha) { return invert_pvalue(kuiper_pvalue, n, alpha); }

DistributionReport ks_circular_and_gaussian(const std::vector<std::vector<double>>& u_samples,
                                            const std::vector<double>& x_samples, double effective_samples,
                                            const InvariantLaw& law, double L, double min_effective) {
  if (effective_samples < min_effective)
    throw InsufficientSamplesError("effective sample size " + std::to_string(effective_samples) + " below required " +
                                       std::to_string(min_effective),
                                   effective_samples, min_effective);
  if (u_samples.size() != law.gaussian_variances.size())
    throw std::invalid_argument("ks_circular_and_gaussian: dimension mismatch");
  DistributionReport r;
  r.n_samples = x_samples.size();
  r.effective_samples = effective_samples;
  for (std::size_t j = 0; j < u_samples.size(); ++j)
    r.ks_u.push_back(ks_gaussian(u_samples[j], law.gaussian_variances[j]));
  r.kuiper_x = kuiper_uniform(x_samples, L);
  r.ks_critical_1pct = ks_critical_value(r.n_samples, 0.01);
  r.kuiper_critical_1pct = kuiper_critical_value(r.n_samples, 0.01);
  return r;
}

void write_stats_csv(std::ostream& os, const EnsembleStats& st, const DistributionReport* report) {
  os << "section,name,index,value\n";
  auto row = [&](const char* section, const std::string& name, std::size_t index, double v) {
    os << section << ',' << name << ',' << index << ',' << format_double(v) << '\n';
  };
  for (std::size_t j = 0; j < st.d; ++j) {
    const std::string u = "u" + std::to_string(j + 1);
    row("moment", u + "_mean", 0, st.u_moments[j].mean);
    row("moment", u + "_variance", 0, st.u_moments[j].variance());
    row("moment", u + "_count", 0, st.u_moments[j].count);
  }
  const auto mass = st.histogram_mass();
  for (std::size_t b = 0; b < mass.size(); ++b) row("histogram", "x_mass", b, mass[b]);
  for (std::size_t k = 0; k < st.autocorr.size(); ++k) {
    const std::string name = k < st.d ? "u" + std::to_string(k + 1) : std::string("cos_x");
    for (std::size_t lag = 0; lag < st.autocorr[k].n.size(); ++lag) {
      row("autocorr", name, lag, st.autocorr[k].autocorrelation(lag));
    }
  }
  for (std::size_t lag = 0; !st.autocorr.empty() && lag < st.autocorr[0].n.size(); ++lag)
    row("lag_time", "t", lag, st.record_dt * static_cast<double>(lag));
  if (report != nullptr) {
    for (std::size_t j = 0; j < report->ks_u.size(); ++j) row("ks", "u" + std::to_string(j + 1), 0, report->ks_u[j]);
    row("ks", "kuiper_x", 0, report->kuiper_x);
    row("ks", "ks_critical_1pct", 0, report->ks_critical_1pct);
    row("ks", "kuiper_critical_1pct", 0, report->kuiper_critical_1pct);
    row("ks", "effective_samples", 0, report->effective_samples);
  }
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("trajectory dump truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr char kMagic[8] = {'S', 'R', 'D', 'T', 'R', 'A', 'J', '1'};

}  // namespace

void write_trajectory_binary(std::ostream& os, const Trajectory& traj, std::uint64_t model_hash) {
  const std::uint64_t d = traj.states.empty() ? 0 : traj.states.front().u.size();
  os.write(kMagic, 8);
  put_u64(os, model_hash);
  put_u64(os, d);
  put_u64(os, traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    put_f64(os, traj.times[i]);
    for (double v : traj.states[i].u) put_f64(os, v);
    put_f64(os, traj.states[i].x);
  }
}

Trajectory read_trajectory_binary(std::istream& is, std::uint64_t* model_hash) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a trajectory dump");
  const std::uint64_t hash = get_u64(is);
  if (model_hash) *model_hash = hash;
  const std::uint64_t d = get_u64(is);
  const std::uint64_t n = get_u64(is);
  Trajectory t;
  for (std::uint64_t i = 0; i < n; ++i) {
    t.times.push_back(std::bit_cast<double>(get_u64(is)));
    SystemState s;
    for (std::uint64_t j = 0; j < d; ++j) s.u.push_back(std::bit_cast<double>(get_u64(is)));
    s.x = std::bit_cast<double>(get_u64(is));
    t.states.push_back(std::move(s));
  }
  return t;
}

}  // namespace srd
