#include <doctest.h>

#include <cmath>
#include <random>

#include "srd/hermite.hpp"
#include "srd/polynomial.hpp"

using namespace srd;

TEST_SUITE("hermite") {

TEST_CASE("Gauss-Hermite moments of N(0,1)") {
  for (int n : {1, 3, 8, 20}) {
    const auto r = gauss_hermite(n);
    double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double z = r.nodes[i], w = r.weights[i];
      m0 += w;
      m1 += w * z;
      m2 += w * z * z;
      m4 += w * z * z * z * z;
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(m1) < 1e-14);
    if (n >= 2) CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    if (n >= 3) CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
  }
}

TEST_CASE("normalized Hermite functions are orthonormal") {
  const int D = 10;
  const auto r = gauss_hermite(D + 2);
  std::vector<double> h(D + 1);
  std::vector<std::vector<double>> gram(D + 1, std::vector<double>(D + 1));
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    hermite_values(D, r.nodes[i], h);
    for (int a = 0; a <= D; ++a)
      for (int b = 0; b <= D; ++b) gram[a][b] += r.weights[i] * h[a] * h[b];
  }
  for (int a = 0; a <= D; ++a)
    for (int b = 0; b <= D; ++b) CHECK(std::abs(gram[a][b] - (a == b ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("total-degree index sets") {
  const auto idx = total_degree_indices(2, 4);
  CHECK(idx.size() == 15);
  CHECK(idx.front() == MultiIndex{0, 0});
  const auto idx4 = total_degree_indices(4, 3);
  CHECK(idx4.size() == 35);
  int prev = 0;
  for (const auto& a : idx4) {
    int s = 0;
    for (int v : a) s += v;
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("scaled tensor rule integrates Gaussian moments") {
  const std::vector<double> var{0.25, 4.0};
  const auto rule = gaussian_tensor_rule(var, 5);
  double e11 = 0, e22 = 0, e1122 = 0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto u = rule.point(q);
    e11 += rule.weights[q] * u[0] * u[0];
    e22 += rule.weights[q] * u[1] * u[1];
    e1122 += rule.weights[q] * u[0] * u[0] * u[1] * u[1];
  }
  CHECK(e11 == doctest::Approx(0.25));
  CHECK(e22 == doctest::Approx(4.0));
  CHECK(e1122 == doctest::Approx(1.0));
}

TEST_CASE("polynomial calculus") {
  const auto x = Polynomial::coordinate(2, 0), y = Polynomial::coordinate(2, 1);
  const auto p = x * x * y + 3.0 * y - Polynomial::constant(2, 2.0);
  const std::vector<double> pt{1.5, -2.0};
  CHECK(p(pt) == doctest::Approx(2.25 * -2.0 - 6.0 - 2.0));
  CHECK(p.derivative(0)(pt) == doctest::Approx(2 * 1.5 * -2.0));
  CHECK(p.derivative(1)(pt) == doctest::Approx(2.25 + 3.0));
  CHECK(p.degree() == 3);
  std::mt19937_64 rng(1);
  const auto r = Polynomial::random(3, 4, rng);
  CHECK(r.degree() <= 4);
  for (const auto& [e, c] : r.terms()) CHECK(std::abs(c) <= 1.0);
}

}  // TEST_SUITE
