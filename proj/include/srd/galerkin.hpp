#pragma once

// Galerkin matrix of the lifted generator in the L2(mu (x) kappa)-orthonormal
// basis H_alpha(u) phi_f(x): Hermite polynomials scaled to the Gaussian
// variances, truncated by total degree <= D, times the real Fourier system
// 1, sqrt2 cos(jx/L), sqrt2 sin(jx/L) with j <= J.
//
// The transport part A0 is assembled from ladder rules (d/du_j lowers one
// Hermite degree, u_j shifts it by +-1, e_j(x) and e_j'(x) shift the Fourier
// frequency by +-k_j), which makes A0 exactly antisymmetric. The operator
// commutes with the joint rotation x -> x + c, (u_cos, u_sin) -> R(k c / L) u,
// so relaxation times are computed block by block over the angular momenta.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "srd/hermite.hpp"
#include "srd/polynomial.hpp"
#include "srd/model.hpp"

namespace srd {

struct Truncation {
  int max_hermite_degree = 4;    // D
  int max_fourier_frequency = 4; // J

  /// C(D + d, d) (2 J + 1).
  [[nodiscard]] std::size_t basis_size(std::size_t d) const;
  [[nodiscard]] Truncation refined(int step = 2) const {
    return {max_hermite_degree + step, max_fourier_frequency + step};
  }
};

/// Fourier label: 0 is the constant, +j is sqrt2 cos(jx/L), -j is sqrt2 sin(jx/L).
using FourierLabel = int;

class GalerkinOperator {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  [[nodiscard]] const SpectralModel& model() const { return model_; }
  [[nodiscard]] const Truncation& truncation() const { return truncation_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] std::size_t size() const { return hermite_.size() * fourier_.size(); }

  [[nodiscard]] const SparseMatrix& a_sigma() const { return a_sigma_; }
  [[nodiscard]] const SparseMatrix& a0() const { return a0_; }
  /// Matrix of (1/2) Laplacian on T_L, diagonal -(1/2)(j/L)^2.
  [[nodiscard]] const SparseMatrix& delta_part() const { return delta_part_; }
  /// Generator of the joint rotation symmetry; antisymmetric, commutes with A.
  [[nodiscard]] const SparseMatrix& rotation() const { return rotation_; }

  [[nodiscard]] const std::vector<MultiIndex>& hermite_indices() const { return hermite_; }
  [[nodiscard]] const std::vector<FourierLabel>& fourier_labels() const { return fourier_; }
  [[nodiscard]] std::size_t row(std::size_t hermite_pos, std::size_t fourier_pos) const {
    return fourier_pos * hermite_.size() + hermite_pos;
  }
  [[nodiscard]] std::size_t hermite_position(std::size_t row) const { return row % hermite_.size(); }
  [[nodiscard]] std::size_t fourier_position(std::size_t row) const { return row / hermite_.size(); }
  [[nodiscard]] std::optional<std::size_t> hermite_position(const MultiIndex& alpha) const;

  /// psi_row(u, x).
  [[nodiscard]] double basis_value(std::size_t row, std::span<const double> u, double x) const;
  /// Value, u-gradient, x-derivative and second x-derivative of psi_row.
  [[nodiscard]] LiftedJet basis_jet(std::size_t row, std::span<const double> u, double x) const;

  /// A_sigma with the constant row and column removed.
  [[nodiscard]] Eigen::MatrixXd mean_zero_dense() const;

  friend GalerkinOperator build_operator(const SpectralModel& model, const Truncation& truncation, double sigma);

 private:
  SpectralModel model_;
  Truncation truncation_;
  double sigma_ = 0.0;
  std::vector<double> variances_;
  std::vector<MultiIndex> hermite_;
  std::vector<FourierLabel> fourier_;
  SparseMatrix a0_, delta_part_, a_sigma_, rotation_;
};

/// Throws ValidationError if D < 1 or J < max model frequency, and
/// DegenerateModeError if some a_j |lambda_j| = 0.
GalerkinOperator build_operator(const SpectralModel& model, const Truncation& truncation, double sigma);

/// Entry-wise comparison with <psi_p, L^(sigma) psi_q> computed by applying
/// the pointwise generator to the basis and integrating with tensor
/// Gauss-Hermite x trapezoid quadrature. Returns the largest deviation.
double max_deviation_from_quadrature(const GalerkinOperator& op);

struct StructureReport {
  double antisymmetry = 0.0;          // max |A0 + A0^T|
  double constant_row_col = 0.0;      // max |entry| in row/col 0 of A_sigma
  double delta_asymmetry = 0.0;       // max |D - D^T|
  double delta_max_eigen = 0.0;       // largest diagonal of Delta_part (<= 0)
  double rotation_commutator = 0.0;   // max |R A - A R|
};

StructureReport check_structure(const GalerkinOperator& op);

/// Orthogonal invariant subspaces of the rotation symmetry, one per |m|,
/// with the constant function excluded.
struct SymmetryBlocks {
  std::vector<int> momentum;                         // |m| per block
  std::vector<Eigen::MatrixXd> blocks;               // Q_m^T A Q_m
  double leakage = 0.0;                              // max |A Q_m - Q_m (Q_m^T A Q_m)|
  [[nodiscard]] std::size_t largest() const;
};

SymmetryBlocks symmetry_blocks(const GalerkinOperator& op);

/// ||exp(t B)||_2 via Pade scaling-and-squaring and a singular-value solve.
double exp_norm(const Eigen::MatrixXd& B, double t);

/// inf{t : ||exp(t B)||_2 <= e^-1} for a dissipative matrix B, by doubling
/// then bisection to relative `tolerance`. Throws ConvergenceError if the
/// bracket exceeds t_max.
double relaxation_time_dense(const Eigen::MatrixXd& B, double tolerance = 1e-9, double t_max = 1e7);

/// Largest basis the block-dense relaxation-time path accepts.
inline constexpr std::size_t kMaxMeasuredBasisSize = 6000;

struct TrelMeasurement {
  double t_rel = 0.0;
  double abscissa = 0.0;
  std::size_t blocks = 0;
  std::size_t largest_block = 0;
  double leakage = 0.0;
};

/// Relaxation time of the truncated semigroup on the mean-zero subspace.
/// Throws ConvergenceError above kMaxMeasuredBasisSize.
TrelMeasurement measure_trel_at(const GalerkinOperator& op, double tolerance = 1e-9);

struct TrelReport {
  Truncation truncation;
  Truncation refined;
  double t_rel = 0.0;          // at `truncation`
  double t_rel_refined = 0.0;  // at `refined`
  double relative_change = 0.0;
  bool converged = false;
  double abscissa = 0.0;
  std::size_t basis_size = 0;
  std::size_t refined_basis_size = 0;
  std::size_t largest_block = 0;
};

/// Value at (D, J) and (D + 2, J + 2); converged when they differ by less than
/// `threshold` (relative to the refined value).
TrelReport measure_trel(const GalerkinOperator& op, double threshold = 0.02, double tolerance = 1e-9);

/// Repeats measure_trel, stepping (D, J) by 2, until converged or
/// `max_refinements` steps are spent. The last report is returned either way.
TrelReport measure_trel_adaptive(const SpectralModel& model, const Truncation& start, double sigma,
                                 int max_refinements, double threshold = 0.02);

/// Largest real part of the spectrum on the mean-zero subspace.
double spectral_abscissa(const GalerkinOperator& op);

/// Matrix of the collapsed OU generator on pure-u Hermite functions of degree
/// <= D - 1, obtained as -(1/2) (A0^T A0) restricted to Fourier label 0.
struct CollapsedBlock {
  std::vector<MultiIndex> indices;
  Eigen::MatrixXd matrix;
};
CollapsedBlock collapsed_ou_block(const GalerkinOperator& op);

/// Normalized multivariate Hermite function H_alpha(u) as a monomial polynomial.
Polynomial hermite_polynomial(const MultiIndex& alpha, std::span<const double> variances);

struct LiftReport {
  double orthogonality = 0.0;  // max |<A g, h>|
  double energy = 0.0;         // max |1/2 <A g, A h> - (1/(2 nu)) <grad g, grad h>_mu|
  std::size_t pairs = 0;
  double max_hermite_degree = 0;
};

/// Lift identities on all pure-u Hermite basis functions of degree <= D - 1.
LiftReport verify_lift_conditions(const GalerkinOperator& op);

struct IdentityReport {
  double max_residual = 0.0;  // relative to max(1, |lhs|)
  double min_slack = 0.0;     // inequality checks only
  std::size_t violations = 0;
  std::size_t cases = 0;
};

/// int (grad* grad g)^2 dmu = int ||Hess g||_F^2 dmu + sum_j a_j|lambda_j| int (d_j g)^2 dmu
/// for `n_random` random polynomials of degree <= max_degree plus fixed cases.
IdentityReport verify_bochner(const SpectralModel& model, int max_degree, int n_random, std::uint64_t seed);

/// int |grad Phi|^2 |grad g|^2 dmu <= 2 (sum a|lambda|) int |grad g|^2 dmu + 4 int ||Hess g||_F^2 dmu.
IdentityReport verify_drift_inequality(const SpectralModel& model, int max_degree, int n_random, std::uint64_t seed);

struct LStarLReport {
  double max_residual = 0.0;   // coefficient mismatch, matrix vs closed form
  double max_norm_ratio = 0.0; // ||L*L g|| / ||L g||
  double c1 = 0.0;
  bool within_c1 = false;
  std::size_t cases = 0;
};

/// -L^2 (g o pi) = A0^T A0 c_g against the closed form
/// -e^T Hess g e + grad Phi^T Lambda^-1 <grad e, grad e^T> grad g, on random
/// polynomials of degree <= D - 2. Requires J >= 2 k_max, D >= 3 and
/// lstar_l_work(op) <= kMaxLStarLWork.
/// Node count times basis size of the quadrature behind verify_lstar_l.
std::size_t lstar_l_work(const GalerkinOperator& op);
inline constexpr double kMaxLStarLWork = 5e8;

LStarLReport verify_lstar_l(const GalerkinOperator& op, double c1_squared, int n_random, std::uint64_t seed);

/// Sparse triplets "row col value" after a '#' header.
void write_operator_triplets(std::ostream& os, const GalerkinOperator::SparseMatrix& m);
/// CSV: row,fourier,alpha_1..alpha_d.
void write_index_map(std::ostream& os, const GalerkinOperator& op);

}  // namespace srd
