#include "srd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "srd/errors.hpp"

namespace srd {

SpectralModel SpectralModel::torus(double L, std::vector<int> frequencies, std::vector<double> coefficients) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("model.L must be a positive finite number");
  if (frequencies.empty()) throw ValidationError("model.frequencies must not be empty");
  if (frequencies.size() != coefficients.size())
    throw ValidationError("model.frequencies and model.coefficients must have the same length");
  std::set<int> seen;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (frequencies[i] < 1) throw ValidationError("model.frequencies[" + std::to_string(i) + "] must be >= 1");
    if (!seen.insert(frequencies[i]).second)
      throw ValidationError("model.frequencies[" + std::to_string(i) + "] is duplicated");
    if (!(coefficients[i] >= 0.0) || !std::isfinite(coefficients[i]))
      throw ValidationError("model.coefficients[" + std::to_string(i) + "] must be finite and >= 0");
  }

  SpectralModel m;
  m.L_ = L;
  m.frequencies_ = std::move(frequencies);
  m.frequency_coefficients_ = std::move(coefficients);
  for (std::size_t i = 0; i < m.frequencies_.size(); ++i) {
    for (auto kind : {TrigKind::cosine, TrigKind::sine}) {
      m.basis_.push_back(BasisFunction::make(kind, m.frequencies_[i], L));
      m.coefficients_.push_back(m.frequency_coefficients_[i]);
      m.eigenvalues_.push_back(eigenvalue(m.frequencies_[i], L));
    }
  }
  return m;
}

double SpectralModel::volume() const { return circumference(L_); }

int SpectralModel::max_frequency() const { return *std::max_element(frequencies_.begin(), frequencies_.end()); }

double SpectralModel::stiffness(std::size_t j) const { return coefficients_[j] * std::abs(eigenvalues_[j]); }

double SpectralModel::min_stiffness() const {
  double s = stiffness(0);
  for (std::size_t j = 1; j < dim(); ++j) s = std::min(s, stiffness(j));
  return s;
}

void SpectralModel::evaluate(double x, std::span<double> e, std::span<double> de) const {
  const double xr = wrap_to_torus(x, L_);
  const double norm = 1.0 / std::sqrt(std::numbers::pi * L_);
  for (std::size_t i = 0; i < frequencies_.size(); ++i) {
    const double w = frequencies_[i] / L_;
    const double c = std::cos(w * xr);
    const double s = std::sin(w * xr);
    e[2 * i] = norm * c;
    e[2 * i + 1] = norm * s;
    de[2 * i] = -w * norm * s;
    de[2 * i + 1] = w * norm * c;
  }
}

double SpectralModel::kernel(double x, double y) const {
  std::vector<double> ex(dim()), dex(dim()), ey(dim()), dey(dim());
  evaluate(x, ex, dex);
  evaluate(y, ey, dey);
  double v = 0.0;
  for (std::size_t j = 0; j < dim(); ++j) v += coefficients_[j] * ex[j] * ey[j];
  return v;
}

double potential_phi(const SpectralModel& model, std::span<const double> u) {
  if (u.size() != model.dim()) throw ValidationError("potential_phi: u has wrong dimension");
  double phi = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) phi += model.stiffness(j) * u[j] * u[j];
  return 0.5 * phi;
}

Drift drift(const SpectralModel& model, const SystemState& state) {
  if (state.u.size() != model.dim()) throw ValidationError("drift: u has wrong dimension");
  Drift out;
  out.du.resize(model.dim());
  std::vector<double> de(model.dim());
  model.evaluate(state.x, out.du, de);
  for (std::size_t j = 0; j < model.dim(); ++j) out.dx -= model.coefficients()[j] * state.u[j] * de[j];
  return out;
}

double apply_lifted_generator(const SpectralModel& model, const LiftedTestFunction& f, double sigma,
                              const SystemState& state) {
  const std::size_t d = model.dim();
  std::vector<double> e(d), de(d);
  model.evaluate(state.x, e, de);
  const LiftedJet jet = f(state.u, state.x);
  double r = 0.5 * sigma * sigma * jet.dxx;
  for (std::size_t j = 0; j < d; ++j)
    r += e[j] * jet.grad_u[j] - model.coefficients()[j] * state.u[j] * de[j] * jet.dx;
  return r;
}

double apply_collapsed_generator(const SpectralModel& model, const CollapsedTestFunction& g,
                                 std::span<const double> u) {
  const CollapsedJet jet = g(u);
  const double scale = 1.0 / (2.0 * model.volume());
  double r = 0.0;
  for (std::size_t j = 0; j < model.dim(); ++j)
    r += -model.stiffness(j) * u[j] * jet.grad[j] + jet.hess_diag[j];
  return scale * r;
}

InvariantLaw invariant_law(const SpectralModel& model) {
  InvariantLaw law;
  law.uniform_mass = model.volume();
  for (std::size_t j = 0; j < model.dim(); ++j) {
    const double s = model.stiffness(j);
    if (!(s > 0.0))
      throw DegenerateModeError("degenerate mode: a_j |lambda_j| = 0 for basis member " + std::to_string(j));
    law.gaussian_variances.push_back(1.0 / s);
  }
  return law;
}

}  // namespace srd
