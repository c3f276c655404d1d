#include "srd/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace srd {

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  // Golub-Welsch on the Jacobi matrix of the monic probabilists' recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Polish nodes with Newton on h_n and take weights 1 / (n h_{n-1}(x)^2),
  // which is more accurate in the tails than the eigenvector components.
  std::vector<double> h(n + 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      hermite_values(n, x, h);
      const double dh = std::sqrt(static_cast<double>(n)) * h[n - 1];
      x -= h[n] / dh;
    }
    hermite_values(n, x, h);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (n * h[n - 1] * h[n - 1]);
    total += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= total;
  // Symmetrize: the exact rule is even, the eigensolver is only accurate to rounding.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

void hermite_values(int max_degree, double z, std::span<double> out) {
  out[0] = 1.0;
  if (max_degree == 0) return;
  out[1] = z;
  for (int n = 1; n < max_degree; ++n)
    out[n + 1] = (z * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) / std::sqrt(n + 1.0);
}

namespace {

void fill_indices(std::size_t dims, int remaining, std::size_t pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos + 1 == dims) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[pos] = a;
    fill_indices(dims, remaining - a, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> total_degree_indices(std::size_t dims, int max_degree) {
  std::vector<MultiIndex> out;
  if (dims == 0) return {MultiIndex{}};
  MultiIndex cur(dims, 0);
  for (int deg = 0; deg <= max_degree; ++deg) fill_indices(dims, deg, 0, cur, out);
  return out;
}

GaussianTensorRule gaussian_tensor_rule(std::span<const double> variances, int points_per_dim) {
  const auto base = gauss_hermite(points_per_dim);
  GaussianTensorRule rule;
  rule.dims = variances.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < rule.dims; ++i) total *= static_cast<std::size_t>(points_per_dim);
  rule.points.resize(total * rule.dims);
  rule.weights.resize(total);
  std::vector<int> digit(rule.dims, 0);
  for (std::size_t p = 0; p < total; ++p) {
    double w = 1.0;
    for (std::size_t j = 0; j < rule.dims; ++j) {
      rule.points[p * rule.dims + j] = std::sqrt(variances[j]) * base.nodes[digit[j]];
      w *= base.weights[digit[j]];
    }
    rule.weights[p] = w;
    for (std::size_t j = 0; j < rule.dims; ++j) {
      if (++digit[j] < points_per_dim) break;
      digit[j] = 0;
    }
  }
  return rule;
}

}  // namespace srd
