#pragma once

// Closed-form relaxation-time bounds: OU gap m, manifold gap eta, C1^2, C2^2,
// the lower bound on t_rel, the convergence rate nu(sigma, T), the optimal
// diffusivity, and the earlier comparison bound on the torus.
//
// Sums and minima over "k" in C1^2 can run over the n user frequencies
// (per_frequency) or over the d = 2n expanded basis members (per_member).
// Both are reported; per_frequency is the primary value for torus models.

#include <json.hpp>

#include "srd/model.hpp"
#include "srd/tensors.hpp"

namespace srd {

enum class SumConvention { per_frequency, per_member };

/// min_j a_j |lambda_j| / (2 nu(M)); 0 when some a_j |lambda_j| = 0.
double ou_gap(const SpectralModel& model);

/// 1 / L^2, the smallest nonzero eigenvalue of -Laplacian on T_L.
double manifold_gap(double L);

/// sqrt(nu(M) / (4 min_j a_j |lambda_j|)); +inf when the minimum vanishes.
double lower_bound_trel(const SpectralModel& model);

/// sqrt(pi L^3 / (2 min_k a_k k^2)) in the torus parametrization.
double lower_bound_trel_torus(const SpectralModel& model);

struct C1Squared {
  double per_frequency = 0.0;
  double per_member = 0.0;
  [[nodiscard]] double get(SumConvention c) const { return c == SumConvention::per_frequency ? per_frequency : per_member; }
};

/// 8 nu(M) (chi + 4 chit + 2 chit sum a|lambda| / min a|lambda|).
C1Squared c1_squared(const SpectralModel& model, double chi, double chi_tilde);
C1Squared c1_squared(const SpectralModel& model, const ChiTensors& tensors);

/// 4 nu(M) / min_k a_k; +inf when some a_k = 0.
double c2_squared(const SpectralModel& model);

/// C sigma^2 / (sigma^4 C2^2 + C1^2 + (1 + 1/(m T^2)) / eta).
double rate_nu(double sigma, double T, double C_universal, double c1_sq, double c2_sq, double eta, double m);

/// Minimizer of sigma^2 C2^2 + sigma^-2 (C1^2 + 1/eta): sigma^4 = (C1^2 + 1/eta) / C2^2.
double sigma_star(double c1_sq, double c2_sq, double eta);

/// Comparison upper bound from an earlier, independent analysis, with the
/// universal constant as a parameter. One frequency uses lambda = k^2/L^2;
/// several frequencies use Lambda_0 = min a_k k^2/L^2, Lambda_1 = sum a_k k^2/L^2.
double comparison_bound(const SpectralModel& model, double sigma, double C_universal = 1.0);

/// Minimizing diffusivity of the comparison formula.
double comparison_sigma_star(const SpectralModel& model);

struct BoundsReport {
  double L = 0.0;
  double m = 0.0;
  double eta = 0.0;
  double chi = 0.0;
  double chi_tilde = 0.0;
  C1Squared c1_sq;
  double c2_sq = 0.0;
  double t_rel_lower = 0.0;
  double sigma_star_per_frequency = 0.0;
  double sigma_star_per_member = 0.0;
  SumConvention convention = SumConvention::per_frequency;  // primary
  bool degenerate = false;  // some a_j |lambda_j| = 0

  [[nodiscard]] double sigma_star(SumConvention c) const {
    return c == SumConvention::per_frequency ? sigma_star_per_frequency : sigma_star_per_member;
  }
  [[nodiscard]] double sigma_star() const { return sigma_star(convention); }
  /// T = m^{-1/2}.
  [[nodiscard]] double default_horizon() const;
  [[nodiscard]] double rate_nu(double sigma, double T, double C_universal, SumConvention c) const;
  [[nodiscard]] double rate_nu(double sigma, double C_universal = 1.0) const;
  /// sigma^2 C2^2 + sigma^-2 (C1^2 + 1/eta), the upper-bound shape without C.
  [[nodiscard]] double upper_proxy(double sigma, SumConvention c) const;
  [[nodiscard]] double upper_proxy(double sigma) const { return upper_proxy(sigma, convention); }
};

/// Report built from the quadrature tensors of `model`.
BoundsReport make_bounds_report(const SpectralModel& model, const ChiTensors& tensors);
/// Report built from caller-supplied chi and chi-tilde.
BoundsReport make_bounds_report(const SpectralModel& model, double chi, double chi_tilde);

nlohmann::json to_json(const BoundsReport& r);

}  // namespace srd
