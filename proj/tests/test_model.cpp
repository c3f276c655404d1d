#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "srd/errors.hpp"
#include "srd/hermite.hpp"
#include "srd/model.hpp"

using namespace srd;
using std::numbers::pi;

namespace {

SpectralModel unit_pair() { return SpectralModel::torus(1.0, {1}, {1.0}); }

// f(u, x) = u_1^p u_2^q * trig(j x / L) with analytic derivatives.
LiftedTestFunction monomial_trig(int p, int q, int j, bool cosine, double L) {
  return [=](std::span<const double> u, double x) {
    auto pw = [](double b, int e) { return e < 0 ? 0.0 : std::pow(b, e); };
    const double w = j / L;
    const double t = j == 0 ? 1.0 : (cosine ? std::cos(w * x) : std::sin(w * x));
    const double dt = j == 0 ? 0.0 : (cosine ? -w * std::sin(w * x) : w * std::cos(w * x));
    const double m = pw(u[0], p) * pw(u[1], q);
    LiftedJet jet;
    jet.value = m * t;
    jet.grad_u = {p * pw(u[0], p - 1) * pw(u[1], q) * t, q * pw(u[0], p) * pw(u[1], q - 1) * t};
    jet.dx = m * dt;
    jet.dxx = -w * w * m * t;
    return jet;
  };
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("construction validates fields") {
  CHECK_THROWS_AS(SpectralModel::torus(1.0, {}, {}), ValidationError);
  CHECK_THROWS_AS(SpectralModel::torus(1.0, {1, 2}, {1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralModel::torus(1.0, {0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralModel::torus(1.0, {1, 1}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralModel::torus(1.0, {1}, {-1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralModel::torus(0.0, {1}, {1.0}), ValidationError);
  const auto m = SpectralModel::torus(2.0, {1, 3}, {0.5, 2.0});
  CHECK(m.dim() == 4);
  CHECK(m.volume() == doctest::Approx(4 * pi));
  CHECK(m.coefficients()[2] == 2.0);
  CHECK(m.coefficients()[3] == 2.0);
  CHECK(m.eigenvalues()[3] == doctest::Approx(-9.0 / 4.0));
  CHECK(m.basis()[2].kind == TrigKind::cosine);
  CHECK(m.basis()[3].kind == TrigKind::sine);
}

TEST_CASE("potential examples") {
  const auto m = unit_pair();
  CHECK(potential_phi(m, std::vector<double>{0, 0}) == 0.0);
  CHECK(potential_phi(m, std::vector<double>{1, 1}) == doctest::Approx(1.0));
  const auto m2 = SpectralModel::torus(1.0, {2}, {2.0});
  CHECK(potential_phi(m2, std::vector<double>{1, 0}) == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)potential_phi(m, std::vector<double>{1, 1, 1}), ValidationError);
}

TEST_CASE("drift examples") {
  const auto m = unit_pair();
  const double c = 1.0 / std::sqrt(pi);
  auto d0 = drift(m, {{0.0, 0.0}, 1.1});
  CHECK(d0.dx == 0.0);
  CHECK(d0.du[0] == doctest::Approx(c * std::cos(1.1)));
  auto d1 = drift(m, {{1.0, 0.0}, 0.0});
  CHECK(std::abs(d1.dx) < 1e-15);
  CHECK(d1.du[0] == doctest::Approx(c));
  CHECK(std::abs(d1.du[1]) < 1e-15);
  auto d2 = drift(m, {{1.0, 0.0}, pi / 2});
  CHECK(d2.dx == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("lifted generator examples") {
  const auto m = unit_pair();
  const SystemState s{{0.7, -0.3}, 2.1};
  LiftedTestFunction constant = [](std::span<const double>, double) {
    return LiftedJet{3.0, {0.0, 0.0}, 0.0, 0.0};
  };
  CHECK(apply_lifted_generator(m, constant, 1.0, s) == 0.0);

  // g(u) = u1^2 u2: only the transport e . grad g remains.
  LiftedTestFunction g = [](std::span<const double> u, double) {
    return LiftedJet{u[0] * u[0] * u[1], {2 * u[0] * u[1], u[0] * u[0]}, 0.0, 0.0};
  };
  std::vector<double> e(2), de(2);
  m.evaluate(s.x, e, de);
  const double expected_g = e[0] * 2 * 0.7 * -0.3 + e[1] * 0.49;
  CHECK(apply_lifted_generator(m, g, 2.0, s) == doctest::Approx(expected_g).epsilon(1e-14));

  // f = u1 e1(x), sigma = 1, u2 = 0: e1^2 - u1^2 e1'^2 - u1 e1 / 2.
  LiftedTestFunction f = [&m](std::span<const double> u, double x) {
    const auto v = m.basis()[0].evaluate(x);
    return LiftedJet{u[0] * v.value, {v.value, 0.0}, u[0] * v.derivative, u[0] * v.second_derivative};
  };
  const SystemState s0{{0.7, 0.0}, 2.1};
  const auto v = m.basis()[0].evaluate(s0.x);
  const double expected_f = v.value * v.value - 0.49 * v.derivative * v.derivative - 0.5 * 0.7 * v.value;
  CHECK(apply_lifted_generator(m, f, 1.0, s0) == doctest::Approx(expected_f).epsilon(1e-14));
}

TEST_CASE("collapsed generator examples") {
  const auto m = unit_pair();
  const std::vector<double> u{0.8, -1.3};
  CollapsedTestFunction constant = [](std::span<const double>) { return CollapsedJet{1.0, {0, 0}, {0, 0}}; };
  CHECK(apply_collapsed_generator(m, constant, u) == 0.0);
  CollapsedTestFunction lin = [](std::span<const double> v) { return CollapsedJet{v[0], {1, 0}, {0, 0}}; };
  CHECK(apply_collapsed_generator(m, lin, u) == doctest::Approx(-0.8 / (4 * pi)).epsilon(1e-14));
  CollapsedTestFunction sq = [](std::span<const double> v) { return CollapsedJet{v[0] * v[0], {2 * v[0], 0}, {2, 0}}; };
  CHECK(apply_collapsed_generator(m, sq, u) == doctest::Approx((-2 * 0.64 + 2) / (4 * pi)).epsilon(1e-14));
}

TEST_CASE("invariant law examples") {
  CHECK(invariant_law(unit_pair()).gaussian_variances[0] == doctest::Approx(1.0));
  CHECK(invariant_law(SpectralModel::torus(1.0, {2}, {2.0})).gaussian_variances[1] == doctest::Approx(1.0 / 8));
  CHECK(invariant_law(SpectralModel::torus(2.0, {1}, {1.0})).gaussian_variances[0] == doctest::Approx(4.0));
  CHECK(invariant_law(unit_pair()).uniform_mass == doctest::Approx(2 * pi));
  CHECK_THROWS_AS(invariant_law(SpectralModel::torus(1.0, {1, 2}, {1.0, 0.0})), DegenerateModeError);
}

TEST_CASE("stationarity and antisymmetry on polynomial x trig functions") {
  for (double L : {1.0, 2.0}) {
    const auto m = SpectralModel::torus(L, {1}, {1.5});
    const auto law = invariant_law(m);
    const auto gh = gaussian_tensor_rule(law.gaussian_variances, 8);
    const auto xq = make_quadrature(12, L);
    std::vector<LiftedTestFunction> fs;
    for (int p = 0; p <= 3; ++p)
      for (int q = 0; q + p <= 3; ++q)
        for (int j = 0; j <= 3; ++j) fs.push_back(monomial_trig(p, q, j, (p + q + j) % 2 == 0, L));
    auto integrate = [&](auto&& fn) {
      double s = 0.0;
      for (std::size_t a = 0; a < gh.size(); ++a)
        for (std::size_t b = 0; b < xq.size(); ++b)
          s += gh.weights[a] * xq.weights[b] / circumference(L) * fn(gh.point(a), xq.nodes[b]);
      return s;
    };
    for (double sigma : {0.0, 1.3}) {
      double worst = 0.0;
      for (const auto& f : fs)
        worst = std::max(worst, std::abs(integrate([&](std::span<const double> u, double x) {
          return apply_lifted_generator(m, f, sigma, {{u[0], u[1]}, x});
        })));
      CHECK(worst < 1e-10);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); i += 3)
      for (std::size_t k = 0; k < fs.size(); k += 5)
        worst = std::max(worst, std::abs(integrate([&](std::span<const double> u, double x) {
          const SystemState s{{u[0], u[1]}, x};
          return fs[i](u, x).value * apply_lifted_generator(m, fs[k], 0.0, s) +
                 fs[k](u, x).value * apply_lifted_generator(m, fs[i], 0.0, s);
        })));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("kernel is positive semi-definite on random trig polynomials") {
  const double L = 1.5;
  const auto m = SpectralModel::torus(L, {1, 2, 4}, {1.0, 0.3, 2.0});
  const auto q = make_quadrature(16, L);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c(11);
    for (auto& v : c) v = n01(rng);
    auto f = [&](double x) {
      double s = c[0];
      for (int j = 1; j <= 5; ++j) s += c[2 * j - 1] * std::cos(j * x / L) + c[2 * j] * std::sin(j * x / L);
      return s;
    };
    double total = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a)
      for (std::size_t b = 0; b < q.size(); ++b)
        total += q.weights[a] * q.weights[b] * m.kernel(q.nodes[a], q.nodes[b]) * f(q.nodes[a]) * f(q.nodes[b]);
    CHECK(total >= -1e-10);
    CHECK(m.kernel(q.nodes[3], q.nodes[7]) == doctest::Approx(m.kernel(q.nodes[7], q.nodes[3])));
  }
}

}  // TEST_SUITE
