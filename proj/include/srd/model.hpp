#pragma once

// Finite-dimensional self-repelling diffusion on T_L: the spectral interaction
// model, the quadratic potential Phi, the invariant law mu (x) kappa, and
// pointwise application of the lifted and collapsed generators.

#include <functional>
#include <span>
#include <vector>

#include "srd/torus_basis.hpp"

namespace srd {

/// Interaction model on T_L expanded to d = 2n members: for every user
/// frequency k with coefficient a the pair (cos, sin) shares a and -k^2/L^2.
class SpectralModel {
 public:
  /// Throws ValidationError on empty input, duplicate or non-positive
  /// frequencies, negative coefficients, or L <= 0.
  static SpectralModel torus(double L, std::vector<int> frequencies, std::vector<double> coefficients);

  [[nodiscard]] std::size_t dim() const { return basis_.size(); }
  [[nodiscard]] std::size_t n_frequencies() const { return frequencies_.size(); }
  [[nodiscard]] double L() const { return L_; }
  /// nu(M) = 2 pi L.
  [[nodiscard]] double volume() const;

  [[nodiscard]] const std::vector<BasisFunction>& basis() const { return basis_; }
  [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }
  [[nodiscard]] const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const std::vector<int>& frequencies() const { return frequencies_; }
  [[nodiscard]] const std::vector<double>& frequency_coefficients() const { return frequency_coefficients_; }
  [[nodiscard]] int max_frequency() const;

  /// a_j |lambda_j| of expanded member j.
  [[nodiscard]] double stiffness(std::size_t j) const;
  [[nodiscard]] double min_stiffness() const;

  /// Fill e(x) and e'(x) (both length d).
  void evaluate(double x, std::span<double> e, std::span<double> de) const;

  /// V(x, y) = sum_j a_j e_j(x) e_j(y).
  [[nodiscard]] double kernel(double x, double y) const;

 private:
  double L_ = 1.0;
  std::vector<int> frequencies_;
  std::vector<double> frequency_coefficients_;
  std::vector<BasisFunction> basis_;
  std::vector<double> coefficients_;
  std::vector<double> eigenvalues_;
};

struct SystemState {
  std::vector<double> u;  // environment coordinates
  double x = 0.0;         // particle position in [0, 2 pi L)
};

struct InvariantLaw {
  std::vector<double> gaussian_variances;  // 1 / (a_j |lambda_j|)
  double uniform_mass = 0.0;               // nu(M)
};

/// 1/2 sum_j a_j |lambda_j| u_j^2. Throws ValidationError on dimension mismatch.
double potential_phi(const SpectralModel& model, std::span<const double> u);

struct Drift {
  std::vector<double> du;
  double dx = 0.0;
};

/// du_j = e_j(x), dx = -sum_j a_j u_j e_j'(x).
Drift drift(const SpectralModel& model, const SystemState& state);

/// Pointwise data of a test function f(u, x).
struct LiftedJet {
  double value = 0.0;
  std::vector<double> grad_u;
  double dx = 0.0;
  double dxx = 0.0;
};
using LiftedTestFunction = std::function<LiftedJet(std::span<const double> u, double x)>;

/// sum_j (e_j d_{u_j} f - a_j u_j e_j' d_x f) + sigma^2/2 d_xx f.
double apply_lifted_generator(const SpectralModel& model, const LiftedTestFunction& f, double sigma,
                              const SystemState& state);

/// Pointwise data of g(u): gradient and Hessian diagonal.
struct CollapsedJet {
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> hess_diag;
};
using CollapsedTestFunction = std::function<CollapsedJet(std::span<const double> u)>;

/// -(1/(2 nu(M))) grad Phi . grad g + (1/(2 nu(M))) Laplacian g.
double apply_collapsed_generator(const SpectralModel& model, const CollapsedTestFunction& g,
                                 std::span<const double> u);

/// Throws DegenerateModeError if some a_j |lambda_j| = 0.
InvariantLaw invariant_law(const SpectralModel& model);

}  // namespace srd
