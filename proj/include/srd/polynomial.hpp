#pragma once

// Sparse multivariate polynomials in monomial form, enough calculus for the
// Gaussian integral identities checked by the Galerkin module.

#include <map>
#include <random>
#include <span>
#include <vector>

namespace srd {

class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(std::size_t dims = 0) : dims_(dims) {}

  static Polynomial constant(std::size_t dims, double c);
  static Polynomial coordinate(std::size_t dims, std::size_t j);
  /// Random coefficients in [-1, 1] on every monomial of total degree <= degree.
  static Polynomial random(std::size_t dims, int degree, std::mt19937_64& rng);

  [[nodiscard]] std::size_t dims() const { return dims_; }
  [[nodiscard]] int degree() const;
  [[nodiscard]] const std::map<Exponents, double>& terms() const { return terms_; }

  void add_term(const Exponents& e, double c);

  [[nodiscard]] double operator()(std::span<const double> u) const;
  [[nodiscard]] Polynomial derivative(std::size_t j) const;

  friend Polynomial operator+(Polynomial a, const Polynomial& b);
  friend Polynomial operator-(Polynomial a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, Polynomial a);

 private:
  std::size_t dims_;
  std::map<Exponents, double> terms_;
};

}  // namespace srd
