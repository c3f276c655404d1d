#include "srd/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srd/hermite.hpp"

namespace srd {

Polynomial Polynomial::constant(std::size_t dims, double c) {
  Polynomial p(dims);
  p.add_term(Exponents(dims, 0), c);
  return p;
}

Polynomial Polynomial::coordinate(std::size_t dims, std::size_t j) {
  Polynomial p(dims);
  Exponents e(dims, 0);
  e[j] = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::random(std::size_t dims, int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Polynomial p(dims);
  for (const auto& e : total_degree_indices(dims, degree)) p.add_term(e, coef(rng));
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(std::span<const double> u) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (std::size_t j = 0; j < dims_; ++j)
      for (int p = 0; p < e[j]; ++p) m *= u[j];
    s += m;
  }
  return s;
}

Polynomial Polynomial::derivative(std::size_t j) const {
  Polynomial out(dims_);
  for (const auto& [e, c] : terms_) {
    if (e[j] == 0) continue;
    Exponents f = e;
    --f[j];
    out.add_term(f, c * e[j]);
  }
  return out;
}

Polynomial operator+(Polynomial a, const Polynomial& b) {
  for (const auto& [e, c] : b.terms_) a.add_term(e, c);
  return a;
}

Polynomial operator-(Polynomial a, const Polynomial& b) {
  for (const auto& [e, c] : b.terms_) a.add_term(e, -c);
  return a;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out(a.dims_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Polynomial::Exponents e(a.dims_);
      for (std::size_t j = 0; j < a.dims_; ++j) e[j] = ea[j] + eb[j];
      out.add_term(e, ca * cb);
    }
  return out;
}

Polynomial operator*(double s, Polynomial a) {
  for (auto& [e, c] : a.terms_) c *= s;
  return a;
}

}  // namespace srd
