#pragma once

// Laplace-Beltrami eigenbasis of the flat circle T_L = R / (2 pi L Z) and
// trapezoid quadrature that is exact on trigonometric polynomials.

#include <cstddef>
#include <numbers>
#include <vector>

namespace srd {

enum class TrigKind { cosine, sine };

/// One orthonormal eigenfunction (pi L)^{-1/2} cos(kx/L) or (pi L)^{-1/2} sin(kx/L).
struct BasisFunction {
  TrigKind kind = TrigKind::cosine;
  int frequency = 1;
  double circumference_param = 1.0;  // L

  struct Value {
    double value;
    double derivative;
    double second_derivative;
  };

  /// Throws std::invalid_argument for frequency < 1 or L <= 0.
  static BasisFunction make(TrigKind kind, int frequency, double L);

  [[nodiscard]] double eigenvalue() const;
  [[nodiscard]] Value evaluate(double x) const;
};

/// -k^2 / L^2. Rejects k = 0 and L <= 0.
double eigenvalue(int k, double L);

/// Value and first derivative at x (any real; periodicity is exact).
BasisFunction::Value eval_basis(const BasisFunction& f, double x);

double circumference(double L);

/// Reduce x into [0, 2 pi L).
double wrap_to_torus(double x, double L);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double L = 1.0;
  int max_frequency = 0;  // exact for Fourier modes with |j| <= max_frequency

  [[nodiscard]] std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// Uniform trapezoid rule on [0, 2 pi L) with bit_ceil(2 F + 1) nodes.
QuadratureRule make_quadrature(int max_frequency, double L);

}  // namespace srd
