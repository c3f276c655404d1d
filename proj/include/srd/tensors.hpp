#pragma once

// Rank-4 interaction tensors
//   chi_ijkl  = int e_i e_j e_k e_l dnu
//   chit_ijkl = int <grad e_i, grad e_j><grad e_k, grad e_l> / (|lambda_i| |lambda_k|) dnu
// by exact trapezoid quadrature, plus the Fourier selection rule that
// predicts which entries can be nonzero.

#include <array>
#include <iosfwd>
#include <vector>

#include "srd/model.hpp"

namespace srd {

struct ChiTensors {
  std::size_t d = 0;
  std::vector<double> chi_entries;        // d^4, row-major in (i, j, k, l)
  std::vector<double> chi_tilde_entries;  // d^4
  double chi = 0.0;                       // Frobenius norms
  double chi_tilde = 0.0;

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return ((i * d + j) * d + k) * d + l;
  }
  [[nodiscard]] double chi_at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return chi_entries[index(i, j, k, l)];
  }
  [[nodiscard]] double chi_tilde_at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return chi_tilde_entries[index(i, j, k, l)];
  }
};

/// Tensors of `model` with a rule exact up to frequency 4 k_max.
ChiTensors compute_chi(const SpectralModel& model);
/// Same with a caller-chosen number of extra node doublings (exactness probe).
ChiTensors compute_chi(const SpectralModel& model, int extra_doublings);

/// Whether (f_1..f_4) splits into two groups of equal sum (the frequency-only
/// condition, necessary for a nonzero quartic integral).
bool admits_equal_sum_partition(const std::array<int, 4>& frequencies);

/// Exact decision whether int prod_i trig_i(f_i x) over a period is nonzero.
/// Expands every factor into exponentials and sums the signed contributions
/// of all sign patterns with sum_i eps_i f_i = 0 in integer arithmetic.
bool selection_rule_nonzero(const std::array<int, 4>& frequencies, const std::array<TrigKind, 4>& kinds);

/// Kinds after differentiation (cos <-> sin), used for the chi-tilde entries.
std::array<TrigKind, 4> gradient_kinds(const std::array<TrigKind, 4>& kinds);

struct SelectionAgreement {
  std::size_t rule_nonzero = 0;          // exact selection rule, chi + chi-tilde
  std::size_t partition_nonzero = 0;     // frequency partition and even sine count
  std::size_t quadrature_nonzero = 0;    // |entry| >= threshold
  std::size_t mismatches = 0;            // rule vs quadrature
  double max_abs_ruled_zero = 0.0;       // largest |entry| the rule calls zero
};

SelectionAgreement check_selection_rule(const SpectralModel& model, const ChiTensors& t, double threshold = 1e-12);

struct ScalingRow {
  int n = 0;
  double chi = 0.0;
  double chi_tilde = 0.0;
  double chi_scaled = 0.0;        // chi L / n^{3/2}
  double chi_tilde_scaled = 0.0;  // chi-tilde L / n^3
  double running_max_chi_scaled = 0.0;
  double running_max_chi_tilde_scaled = 0.0;
};

/// Frequencies 1..n with unit coefficients for n = 1..n_max (n_max <= 8).
std::vector<ScalingRow> scaling_probe(int n_max, double L);

/// Side-by-side reading of the single-frequency aggregate.
struct SingleFrequencyAggregate {
  double quadrature_chi = 0.0;
  double quadrature_chi_tilde = 0.0;
  double pure_entry = 0.0;         // 3 / (4 pi L) expected
  double mixed_entry = 0.0;        // 1 / (4 pi L) expected
  std::size_t pure_count = 0;      // entries with value 3/(4 pi L)
  std::size_t mixed_count = 0;     // entries with value 1/(4 pi L)
  double aggregate_with_6 = 0.0;   // sqrt(2 * 9 + 6) / (4 pi L)
  double aggregate_with_8 = 0.0;   // sqrt(2 * 9 + 8) / (4 pi L)
  bool quadrature_matches_6 = false;
  bool quadrature_matches_8 = false;
};

SingleFrequencyAggregate adjudicate_single_frequency(const SpectralModel& model, const ChiTensors& t);

/// CSV with columns i,j,k,l,kind,value for entries with |value| >= threshold.
void write_chi_csv(std::ostream& os, const ChiTensors& t, double threshold = 1e-12);

}  // namespace srd
