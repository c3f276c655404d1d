#include "srd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace srd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum_stiffness(const SpectralModel& model, SumConvention c) {
  double s = 0.0;
  const std::size_t stride = c == SumConvention::per_frequency ? 2 : 1;
  for (std::size_t j = 0; j < model.dim(); j += stride) s += model.stiffness(j);
  return s;
}

}  // namespace

double ou_gap(const SpectralModel& model) { return model.min_stiffness() / (2.0 * model.volume()); }

double manifold_gap(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("manifold_gap: L must be positive");
  return 1.0 / (L * L);
}

double lower_bound_trel(const SpectralModel& model) {
  const double s = model.min_stiffness();
  if (!(s > 0.0)) return kInf;
  return std::sqrt(model.volume() / (4.0 * s));
}

double lower_bound_trel_torus(const SpectralModel& model) {
  double mn = kInf;
  for (std::size_t i = 0; i < model.n_frequencies(); ++i) {
    const double k = model.frequencies()[i];
    mn = std::min(mn, model.frequency_coefficients()[i] * k * k);
  }
  if (!(mn > 0.0)) return kInf;
  const double L = model.L();
  return std::sqrt(std::numbers::pi * L * L * L / (2.0 * mn));
}

C1Squared c1_squared(const SpectralModel& model, double chi, double chi_tilde) {
  const double mn = model.min_stiffness();
  auto eval = [&](SumConvention c) {
    if (!(mn > 0.0)) return kInf;
    return 8.0 * model.volume() * (chi + 4.0 * chi_tilde + 2.0 * chi_tilde * sum_stiffness(model, c) / mn);
  };
  return {eval(SumConvention::per_frequency), eval(SumConvention::per_member)};
}

C1Squared c1_squared(const SpectralModel& model, const ChiTensors& tensors) {
  return c1_squared(model, tensors.chi, tensors.chi_tilde);
}

double c2_squared(const SpectralModel& model) {
  const auto& a = model.frequency_coefficients();
  const double mn = *std::min_element(a.begin(), a.end());
  if (!(mn > 0.0)) return kInf;
  return 4.0 * model.volume() / mn;
}

double rate_nu(double sigma, double T, double C_universal, double c1_sq, double c2_sq, double eta, double m) {
  if (!(sigma > 0.0) || !(T > 0.0) || !(C_universal > 0.0))
    throw std::invalid_argument("rate_nu: sigma, T and C must be positive");
  const double s2 = sigma * sigma;
  return C_universal * s2 / (s2 * s2 * c2_sq + c1_sq + (1.0 + 1.0 / (m * T * T)) / eta);
}

double sigma_star(double c1_sq, double c2_sq, double eta) {
  if (!(c2_sq > 0.0)) throw std::invalid_argument("sigma_star: C2^2 must be positive");
  return std::pow((c1_sq + 1.0 / eta) / c2_sq, 0.25);
}

namespace {

// L^2 (1 + L0)^2 / L0^2 * (sigma^2 A + B + sigma^-2 Q^2), returned as its three pieces.
struct ComparisonTerms {
  double prefactor, A, B, Q;
};

ComparisonTerms comparison_terms(const SpectralModel& model) {
  const double L = model.L();
  const auto& ks = model.frequencies();
  const auto& as = model.frequency_coefficients();
  if (model.n_frequencies() == 1) {
    const double a = as[0];
    const double lam = static_cast<double>(ks[0]) * ks[0] / (L * L);
    const double q = 1.0 + std::sqrt(1.0 + a * lam) / L;
    const double pre = L * L * (1.0 + a * lam) * (1.0 + a * lam) / (a * a * lam * lam);
    return {pre, lam * lam, lam * q, q};
  }
  const double n = static_cast<double>(model.n_frequencies());
  double l0 = kInf, l1 = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double v = as[i] * ks[i] * ks[i] / (L * L);
    l0 = std::min(l0, v);
    l1 += v;
  }
  const double q = n + n * n * n * std::sqrt(1.0 + l1) / L;
  const double pre = L * L * (1.0 + l0) * (1.0 + l0) / (l0 * l0);
  return {pre, l1 * l1, l1 * q, q};
}

}  // namespace

double comparison_bound(const SpectralModel& model, double sigma, double C_universal) {
  if (!(sigma > 0.0)) throw std::invalid_argument("comparison_bound: sigma must be positive");
  const auto t = comparison_terms(model);
  const double s2 = sigma * sigma;
  return C_universal * t.prefactor * (s2 * t.A + t.B + t.Q * t.Q / s2);
}

double comparison_sigma_star(const SpectralModel& model) {
  const auto t = comparison_terms(model);
  return std::sqrt(t.Q / std::sqrt(t.A));
}

double BoundsReport::default_horizon() const { return 1.0 / std::sqrt(m); }

double BoundsReport::rate_nu(double sigma, double T, double C_universal, SumConvention c) const {
  return srd::rate_nu(sigma, T, C_universal, c1_sq.get(c), c2_sq, eta, m);
}

double BoundsReport::rate_nu(double sigma, double C_universal) const {
  return rate_nu(sigma, default_horizon(), C_universal, convention);
}

double BoundsReport::upper_proxy(double sigma, SumConvention c) const {
  const double s2 = sigma * sigma;
  return s2 * c2_sq + (c1_sq.get(c) + 1.0 / eta) / s2;
}

BoundsReport make_bounds_report(const SpectralModel& model, double chi, double chi_tilde) {
  BoundsReport r;
  r.L = model.L();
  r.m = ou_gap(model);
  r.eta = manifold_gap(model.L());
  r.chi = chi;
  r.chi_tilde = chi_tilde;
  r.c1_sq = c1_squared(model, chi, chi_tilde);
  r.c2_sq = c2_squared(model);
  r.t_rel_lower = lower_bound_trel(model);
  r.degenerate = !(model.min_stiffness() > 0.0);
  if (std::isfinite(r.c2_sq) && std::isfinite(r.c1_sq.per_frequency)) {
    r.sigma_star_per_frequency = srd::sigma_star(r.c1_sq.per_frequency, r.c2_sq, r.eta);
    r.sigma_star_per_member = srd::sigma_star(r.c1_sq.per_member, r.c2_sq, r.eta);
  }
  return r;
}

BoundsReport make_bounds_report(const SpectralModel& model, const ChiTensors& tensors) {
  return make_bounds_report(model, tensors.chi, tensors.chi_tilde);
}

nlohmann::json to_json(const BoundsReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  nlohmann::json j;
  j["L"] = r.L;
  j["m"] = num(r.m);
  j["eta"] = num(r.eta);
  j["chi"] = num(r.chi);
  j["chi_tilde"] = num(r.chi_tilde);
  j["c1_sq"] = {{"per_frequency", num(r.c1_sq.per_frequency)}, {"per_member", num(r.c1_sq.per_member)}};
  j["c2_sq"] = num(r.c2_sq);
  j["t_rel_lower"] = num(r.t_rel_lower);
  j["sigma_star"] = {{"per_frequency", num(r.sigma_star_per_frequency)},
                     {"per_member", num(r.sigma_star_per_member)}};
  j["default_horizon_T"] = r.m > 0 ? num(r.default_horizon()) : nlohmann::json("inf");
  j["primary_convention"] = r.convention == SumConvention::per_frequency ? "per_frequency" : "per_member";
  j["degenerate"] = r.degenerate;
  return j;
}

}  // namespace srd
