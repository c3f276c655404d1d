#include "srd/torus_basis.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace srd {

namespace {

void require_valid(int k, double L) {
  if (k < 1) throw std::invalid_argument("torus basis frequency must be >= 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("torus parameter L must be positive");
}

}  // namespace

BasisFunction BasisFunction::make(TrigKind kind, int frequency, double L) {
  require_valid(frequency, L);
  return BasisFunction{kind, frequency, L};
}

double BasisFunction::eigenvalue() const { return srd::eigenvalue(frequency, circumference_param); }

BasisFunction::Value BasisFunction::evaluate(double x) const {
  const double L = circumference_param;
  const double w = frequency / L;
  const double norm = 1.0 / std::sqrt(std::numbers::pi * L);
  const double phase = w * wrap_to_torus(x, L);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  if (kind == TrigKind::cosine) return {norm * c, -w * norm * s, -w * w * norm * c};
  return {norm * s, w * norm * c, -w * w * norm * s};
}

double eigenvalue(int k, double L) {
  require_valid(k, L);
  return -static_cast<double>(k) * k / (L * L);
}

BasisFunction::Value eval_basis(const BasisFunction& f, double x) { return f.evaluate(x); }

double circumference(double L) { return 2.0 * std::numbers::pi * L; }

double wrap_to_torus(double x, double L) {
  const double period = circumference(L);
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

QuadratureRule make_quadrature(int max_frequency, double L) {
  if (max_frequency < 1) throw std::invalid_argument("quadrature max_frequency must be >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("torus parameter L must be positive");
  const auto n = std::bit_ceil(static_cast<unsigned>(2 * max_frequency + 1));
  QuadratureRule rule;
  rule.L = L;
  rule.max_frequency = max_frequency;
  rule.nodes.resize(n);
  rule.weights.assign(n, circumference(L) / n);
  for (unsigned i = 0; i < n; ++i) rule.nodes[i] = circumference(L) * i / n;
  return rule;
}

}  // namespace srd
