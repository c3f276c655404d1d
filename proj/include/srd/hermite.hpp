#pragma once

// Orthonormal Hermite polynomials for the standard Gaussian, Gauss-Hermite
// quadrature, and total-degree multi-index sets.

#include <cstddef>
#include <span>
#include <vector>

namespace srd {

/// Probabilists' Gauss-Hermite rule for N(0, 1): weights sum to one and the
/// rule is exact for polynomials of degree <= 2 n - 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int n);

/// h_0..h_{max_degree} at z with h_n = He_n / sqrt(n!), orthonormal under N(0, 1).
void hermite_values(int max_degree, double z, std::span<double> out);

using MultiIndex = std::vector<int>;

/// All multi-indices in `dims` coordinates with total degree <= max_degree,
/// graded by total degree, lexicographically descending inside a degree.
/// The zero index is first.
std::vector<MultiIndex> total_degree_indices(std::size_t dims, int max_degree);

/// Tensor Gauss-Hermite rule for the product Gaussian with the given
/// variances; `points_per_dim` nodes in every coordinate.
struct GaussianTensorRule {
  std::size_t dims = 0;
  std::vector<double> points;  // row-major, size() x dims
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
  [[nodiscard]] std::span<const double> point(std::size_t i) const { return {points.data() + i * dims, dims}; }
};

GaussianTensorRule gaussian_tensor_rule(std::span<const double> variances, int points_per_dim);

}  // namespace srd
